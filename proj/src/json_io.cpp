#include "ioslab/json_io.hpp"

#include "ioslab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ioslab {

namespace {

void render(const Json& node, std::string& out, int depth) {
    const std::string indent(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string closing(static_cast<std::size_t>(2 * depth), ' ');
    switch (node.type()) {
        case Json::value_t::object: {
            if (node.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, value] : node.items()) {
                if (!first) out += ",\n";
                first = false;
                out += indent;
                out += Json(key).dump();
                out += ": ";
                render(value, out, depth + 1);
            }
            out += "\n" + closing + "}";
            return;
        }
        case Json::value_t::array: {
            if (node.empty()) {
                out += "[]";
                return;
            }
            // numeric arrays stay on one line so tables remain readable
            const bool flat = std::all_of(node.begin(), node.end(),
                                          [](const Json& v) { return v.is_number() || v.is_null(); });
            if (flat) {
                out += "[";
                bool first = true;
                for (const auto& value : node) {
                    if (!first) out += ", ";
                    first = false;
                    render(value, out, depth + 1);
                }
                out += "]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& value : node) {
                if (!first) out += ",\n";
                first = false;
                out += indent;
                render(value, out, depth + 1);
            }
            out += "\n" + closing + "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = node.get<double>();
            out += std::isfinite(v) ? format_double(v) : "null";
            return;
        }
        default:
            out += node.dump();
            return;
    }
}

}  // namespace

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

std::string canonical_json(const Json& doc) {
    std::string out;
    render(doc, out, 0);
    out += "\n";
    return out;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::Usage, "malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

Json to_json_array(std::span<const double> values) {
    Json arr = Json::array();
    for (double v : values) arr.push_back(v);
    return arr;
}

std::vector<double> doubles_from_json(const Json& array) {
    if (!array.is_array()) throw Error(ErrorKind::Usage, "expected a JSON array of numbers");
    std::vector<double> out;
    out.reserve(array.size());
    for (const auto& v : array) {
        if (!v.is_number()) throw Error(ErrorKind::Usage, "expected a number in JSON array");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace ioslab
