#include "saea/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "saea/error.hpp"

namespace saea {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
    auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.size() - start : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

KeyValueFile KeyValueFile::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string(), e.what());
    }
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("<ini>", e.message() + " at line " + std::to_string(e.line()));
    }
    return KeyValueFile(std::move(tree));
}

bool KeyValueFile::contains(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

std::optional<std::string> KeyValueFile::find(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    // strip trailing "; comment" that the ini parser leaves attached to values
    auto value = *v;
    if (auto pos = value.find(" ;"); pos != std::string::npos) value.erase(pos);
    return trim(value);
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
    return find(key).value_or(fallback);
}

std::string KeyValueFile::require_string(const std::string& key) const {
    auto v = find(key);
    if (!v || v->empty()) throw ConfigError(key, "required field missing");
    return *v;
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) throw ConfigError(key, "expected integer, got '" + *v + "'");
    return out;
}

double KeyValueFile::get_real(const std::string& key, double fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    double out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size()) throw ConfigError(key, "expected number, got '" + *v + "'");
    return out;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
    auto v = find(key);
    if (!v) return fallback;
    std::string s = *v;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError(key, "expected boolean, got '" + *v + "'");
}

std::vector<std::string> KeyValueFile::get_list(const std::string& key) const {
    auto v = find(key);
    if (!v) return {};
    return split_list(*v);
}

std::vector<std::string> KeyValueFile::unknown_keys(const std::vector<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [section, body] : tree_) {
        if (body.empty()) {
            if (std::find(known.begin(), known.end(), section) == known.end()) out.push_back(section);
            continue;
        }
        for (const auto& [key, value] : body) {
            auto full = section + "." + key;
            if (std::find(known.begin(), known.end(), full) == known.end()) out.push_back(full);
        }
    }
    return out;
}

}  // namespace saea
