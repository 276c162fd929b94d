#ifndef KOBA_SRC_TEXT_HPP
#define KOBA_SRC_TEXT_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <koba/errors.hpp>

namespace koba::text
{

inline std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline double parse_number(std::string_view text, std::string_view what)
{
    const std::string s(text);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        fail(ErrorKind::config, "malformed number for " + std::string(what) + ": '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) {
        fail(ErrorKind::config, "malformed number for " + std::string(what) + ": '" + s + "'");
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace koba::text

#endif
