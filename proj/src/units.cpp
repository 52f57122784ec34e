#include "qdstirap/units.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <string>

namespace qdstirap::units {

std::string_view native_unit(Dimension dim) {
    switch (dim) {
    case Dimension::Rate: return "ns^-1";
    case Dimension::Time: return "ns";
    case Dimension::TimeSquared: return "ns^2";
    case Dimension::Temperature: return "K";
    case Dimension::RatePerKelvin: return "ns^-1/K";
    case Dimension::Dimensionless: return "";
    }
    return "";
}

namespace {

std::string normalize_unit(std::string_view raw) {
    std::string out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(raw[i]);
        if (std::isspace(c)) continue;
        // UTF-8 micro sign (C2 B5) and Greek mu (CE BC) both map to 'u'.
        if ((c == 0xC2 && i + 1 < raw.size() && static_cast<unsigned char>(raw[i + 1]) == 0xB5) ||
            (c == 0xCE && i + 1 < raw.size() && static_cast<unsigned char>(raw[i + 1]) == 0xBC)) {
            out.push_back('u');
            ++i;
            continue;
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

double scale_for(const std::string& unit, Dimension dim, std::string_view text) {
    auto bad = [&]() -> double {
        throw ConfigError("unit '" + unit + "' is not valid for a quantity in " +
                          std::string(native_unit(dim)) + ": '" + std::string(text) + "'");
    };
    if (unit.empty()) return 1.0;
    switch (dim) {
    case Dimension::Rate:
        if (unit == "ns^-1" || unit == "1/ns" || unit == "/ns") return 1.0;
        if (unit == "ps^-1" || unit == "1/ps" || unit == "/ps") return 1e3;
        if (unit == "ueV") return 1.0 / kHbarMicroeVNs;
        if (unit == "meV") return 1e3 / kHbarMicroeVNs;
        return bad();
    case Dimension::Time:
        if (unit == "ns") return 1.0;
        if (unit == "ps") return 1e-3;
        return bad();
    case Dimension::TimeSquared:
        if (unit == "ns^2") return 1.0;
        if (unit == "ps^2") return 1e-6;
        return bad();
    case Dimension::Temperature:
        if (unit == "K") return 1.0;
        return bad();
    case Dimension::RatePerKelvin:
        if (unit == "ns^-1/K" || unit == "1/(ns*K)" || unit == "1/ns/K") return 1.0;
        return bad();
    case Dimension::Dimensionless:
        return bad();
    }
    return bad();
}

} // namespace

double parse_quantity(std::string_view text, Dimension dim) {
    std::size_t begin = 0;
    while (begin < text.size() && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    const char* first = text.data() + begin;
    const char* last = text.data() + text.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) {
        throw ConfigError("cannot parse a number from '" + std::string(text) + "'");
    }
    const std::string unit = normalize_unit(std::string_view(ptr, static_cast<std::size_t>(last - ptr)));
    return value * scale_for(unit, dim, text);
}

} // namespace qdstirap::units
