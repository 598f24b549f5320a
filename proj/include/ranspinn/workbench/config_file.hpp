#pragma once

// Flat key-value configuration files.
//
//   # comment
//   epochs = 1500
//   lr0 = 1e-3
//   clouds = [data/a.csv, data/b.csv]
//   out_dir = "runs/default"
//
// One `key = value` per line; `#` starts a comment; lists are bracketed and
// comma separated; strings may be quoted. Keys are read through the typed
// getters, which also record the resolved value (defaults included). finish()
// rejects any key that no getter asked for.

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ranspinn/common/csv.hpp"
#include "ranspinn/common/error.hpp"

namespace ranspinn::workbench {

class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse(std::istream& in, const std::string& source = "<config>",
                            std::filesystem::path base_dir = {}) {
        ConfigFile cfg;
        cfg.source_ = source;
        cfg.base_dir_ = std::move(base_dir);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            const std::string_view body = csv::trim(std::string_view(line).substr(0, hash));
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                throw ValidationError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key(csv::trim(body.substr(0, eq)));
            const std::string value(csv::trim(body.substr(eq + 1)));
            if (key.empty()) throw ValidationError(source + ":" + std::to_string(lineno) + ": empty key");
            if (!cfg.entries_.emplace(key, Entry{value, lineno, false}).second)
                throw ValidationError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        return cfg;
    }

    static ConfigFile load(const std::string& path) {
        auto in = csv::open_input(path);
        return parse(in, path, std::filesystem::path(path).parent_path());
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) {
        const Entry* e = take(key);
        const std::string v = e ? unquote(e->raw) : fallback;
        record(key, v);
        return v;
    }

    /// A path; relative values, the fallback included, resolve against the directory of the config file.
    std::string get_path(const std::string& key, const std::string& fallback) {
        const Entry* e = take(key);
        const std::string v = e ? resolve(unquote(e->raw)) : resolve(fallback);
        record(key, v);
        return v;
    }

    double get_double(const std::string& key, double fallback) {
        const Entry* e = take(key);
        const double v = e ? to_double(key, *e, unquote(e->raw)) : fallback;
        record(key, csv::format_double(v));
        return v;
    }

    long get_int(const std::string& key, long fallback) {
        const Entry* e = take(key);
        const long v = e ? to_int(key, *e, unquote(e->raw)) : fallback;
        record(key, std::to_string(v));
        return v;
    }

    std::size_t get_size(const std::string& key, std::size_t fallback) {
        const Entry* e = take(key);
        std::size_t v = fallback;
        if (e) {
            const long n = to_int(key, *e, unquote(e->raw));
            if (n < 0) throw error(key, *e, "must be nonnegative");
            v = static_cast<std::size_t>(n);
        }
        record(key, std::to_string(v));
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) {
        const Entry* e = take(key);
        bool v = fallback;
        if (e) {
            const std::string s = unquote(e->raw);
            if (s == "true") v = true;
            else if (s == "false") v = false;
            else throw error(key, *e, "expected true or false");
        }
        record(key, v ? "true" : "false");
        return v;
    }

    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) {
        const Entry* e = take(key);
        std::vector<double> v = fallback;
        if (e) {
            v.clear();
            for (const auto& item : list_items(key, *e)) v.push_back(to_double(key, *e, item));
        }
        std::string text = "[";
        for (std::size_t i = 0; i < v.size(); ++i) text += (i ? ", " : "") + csv::format_double(v[i]);
        record(key, text + "]");
        return v;
    }

    std::vector<long> get_ints(const std::string& key, const std::vector<long>& fallback) {
        const Entry* e = take(key);
        std::vector<long> v = fallback;
        if (e) {
            v.clear();
            for (const auto& item : list_items(key, *e)) v.push_back(to_int(key, *e, item));
        }
        std::string text = "[";
        for (std::size_t i = 0; i < v.size(); ++i) text += (i ? ", " : "") + std::to_string(v[i]);
        record(key, text + "]");
        return v;
    }

    std::vector<std::string> get_paths(const std::string& key, const std::vector<std::string>& fallback) {
        const Entry* e = take(key);
        std::vector<std::string> v = fallback;
        if (e) {
            v.clear();
            for (const auto& item : list_items(key, *e)) v.push_back(resolve(item));
        }
        std::string text = "[";
        for (std::size_t i = 0; i < v.size(); ++i) text += (i ? ", " : "") + v[i];
        record(key, text + "]");
        return v;
    }

    /// Replaces a key with a value given elsewhere (e.g. on the command line); the
    /// file entry, if any, counts as read and the override is what gets logged.
    void override_value(const std::string& key, const std::string& value) {
        take(key);
        record(key, value);
    }

    /// Throws if the file holds keys that were never read.
    void finish() const {
        std::string unknown;
        for (const auto& [key, e] : entries_)
            if (!e.used) unknown += (unknown.empty() ? "" : ", ") + key + " (line " + std::to_string(e.line) + ")";
        if (!unknown.empty()) throw ValidationError(source_ + ": unknown configuration keys: " + unknown);
    }

    /// Every key read so far with the value in effect, in reading order.
    const std::vector<std::pair<std::string, std::string>>& resolved() const { return resolved_; }

    void write_resolved(std::ostream& out) const {
        for (const auto& [k, v] : resolved_) out << k << " = " << v << '\n';
    }

private:
    struct Entry {
        std::string raw;
        int line = 0;
        bool used = false;
    };

    Entry* take(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    void record(const std::string& key, const std::string& value) {
        for (auto& kv : resolved_)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        resolved_.emplace_back(key, value);
    }

    ValidationError error(const std::string& key, const Entry& e, const std::string& what) const {
        return ValidationError(source_ + ":" + std::to_string(e.line) + ": '" + key + "' " + what);
    }

    static std::string unquote(std::string_view s) {
        s = csv::trim(s);
        if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
            s = s.substr(1, s.size() - 2);
        return std::string(s);
    }

    std::string resolve(const std::string& p) const {
        if (p.empty()) return p;
        const std::filesystem::path path(p);
        if (path.is_absolute() || base_dir_.empty()) return path.lexically_normal().string();
        return (base_dir_ / path).lexically_normal().string();
    }

    double to_double(const std::string& key, const Entry& e, const std::string& s) const {
        double v = 0.0;
        if (!csv::parse_double(s, v)) throw error(key, e, "is not a number: '" + s + "'");
        return v;
    }

    long to_int(const std::string& key, const Entry& e, const std::string& s) const {
        long v = 0;
        if (!csv::parse_int(s, v)) throw error(key, e, "is not an integer: '" + s + "'");
        return v;
    }

    std::vector<std::string> list_items(const std::string& key, const Entry& e) const {
        const std::string_view s = csv::trim(e.raw);
        if (s.size() < 2 || s.front() != '[' || s.back() != ']') throw error(key, e, "expected a list like [a, b]");
        const std::string_view inner = csv::trim(s.substr(1, s.size() - 2));
        std::vector<std::string> out;
        if (inner.empty()) return out;
        for (auto item : csv::split(inner)) {
            if (item.empty()) throw error(key, e, "has an empty list item");
            out.push_back(unquote(item));
        }
        return out;
    }

    std::string source_;
    std::filesystem::path base_dir_;
    std::map<std::string, Entry> entries_;
    std::vector<std::pair<std::string, std::string>> resolved_;
};

}  // namespace ranspinn::workbench
