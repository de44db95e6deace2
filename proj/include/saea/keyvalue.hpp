#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace saea {

/// INI-style `[section]` / `key = value` file. Keys are addressed as "section.key".
class KeyValueFile {
public:
    KeyValueFile() = default;
    static KeyValueFile read(const std::filesystem::path& path);
    static KeyValueFile parse(const std::string& text);

    bool contains(const std::string& key) const;
    std::optional<std::string> find(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_real(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated list; empty value gives an empty list.
    std::vector<std::string> get_list(const std::string& key) const;

    /// Keys present in the file but absent from `known`, each as "section.key".
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

private:
    explicit KeyValueFile(boost::property_tree::ptree tree) : tree_(std::move(tree)) {}
    boost::property_tree::ptree tree_;
};

std::string trim(std::string_view s);
std::vector<std::string> split_list(std::string_view s, char sep = ',');

}  // namespace saea
