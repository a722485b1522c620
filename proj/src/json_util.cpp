#include "json_util.hpp"

#include <charconv>
#include <cmath>

namespace smlab::detail {

std::string format17(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    std::string s(buf, r.ptr);
    if (s.find_first_of(".en") == std::string::npos) s += ".0";
    return s;
}

namespace {

void write(const nlohmann::json& j, int indent, int depth, std::string& out) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ',';
                    out += nl;
                }
                first = false;
                out += pad;
                out += nlohmann::json(it.key()).dump();
                out += indent > 0 ? ": " : ":";
                write(it.value(), indent, depth + 1, out);
            }
            out += nl;
            out += close_pad;
            out += '}';
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            out += nl;
            bool first = true;
            for (const auto& e : j) {
                if (!first) {
                    out += ',';
                    out += nl;
                }
                first = false;
                out += pad;
                write(e, indent, depth + 1, out);
            }
            out += nl;
            out += close_pad;
            out += ']';
            return;
        }
        case nlohmann::json::value_t::number_float: out += format17(j.get<double>()); return;
        default: out += j.dump(); return;
    }
}

}  // namespace

std::string dump17(const nlohmann::json& j, int indent) {
    std::string out;
    write(j, indent, 0, out);
    return out;
}

}  // namespace smlab::detail
