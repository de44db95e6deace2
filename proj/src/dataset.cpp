#include "saea/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "saea/error.hpp"
#include "saea/keyvalue.hpp"

namespace saea {

namespace {

std::optional<double> parse_double(std::string_view s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string> split_fields(const std::string& line, Delimiter delim) {
    std::vector<std::string> fields;
    if (delim == Delimiter::comma) {
        for (auto& f : split_list(line, ',')) fields.push_back(std::move(f));
        return fields;
    }
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) fields.push_back(tok);
    return fields;
}

// Numeric values sort numerically, anything else lexicographically.
void sort_values(std::vector<std::string>& values) {
    bool numeric = std::all_of(values.begin(), values.end(), [](const std::string& v) { return parse_double(v).has_value(); });
    if (numeric) {
        std::stable_sort(values.begin(), values.end(),
                         [](const std::string& a, const std::string& b) { return *parse_double(a) < *parse_double(b); });
    } else {
        std::sort(values.begin(), values.end());
    }
}

bool contains(const std::vector<std::string>& v, const std::string& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

void Dataset::validate() const {
    if (n_classes < 2) throw SchemaError(name + ": need at least 2 classes, got " + std::to_string(n_classes));
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw SchemaError(name + ": feature rows and label count differ");
    if (class_names.size() != static_cast<std::size_t>(n_classes)) throw SchemaError(name + ": class_names size mismatch");
    for (int y : labels)
        if (y < 0 || y >= n_classes) throw SchemaError(name + ": label " + std::to_string(y) + " out of range");
    if (!features.allFinite()) throw SchemaError(name + ": non-finite feature value");
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.name = name;
    out.n_classes = n_classes;
    out.class_names = class_names;
    out.feature_names = feature_names;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
        out.labels.push_back(labels[rows[i]]);
    }
    return out;
}

Schema Schema::parse(const std::string& text) {
    auto kv = KeyValueFile::parse(text);
    Schema s;
    s.name = kv.require_string("dataset.name");
    s.file = kv.get_string("dataset.file", s.name + ".data");
    auto delim = kv.get_string("dataset.delimiter", "comma");
    if (delim == "comma") {
        s.delimiter = Delimiter::comma;
    } else if (delim == "whitespace") {
        s.delimiter = Delimiter::whitespace;
    } else {
        throw ConfigError("dataset.delimiter", "expected 'comma' or 'whitespace', got '" + delim + "'");
    }
    s.columns = kv.get_list("dataset.columns");
    if (s.columns.empty()) throw ConfigError("dataset.columns", "required field missing");
    s.label = kv.require_string("dataset.label");
    if (!contains(s.columns, s.label)) throw ConfigError("dataset.label", "'" + s.label + "' is not a listed column");
    s.drop = kv.get_list("dataset.drop");
    s.categorical = kv.get_list("dataset.categorical");
    for (const auto& c : s.drop)
        if (!contains(s.columns, c)) throw ConfigError("dataset.drop", "'" + c + "' is not a listed column");
    for (const auto& c : s.categorical)
        if (!contains(s.columns, c)) throw ConfigError("dataset.categorical", "'" + c + "' is not a listed column");
    s.classes = kv.get_list("dataset.classes");

    auto rule = kv.get_string("binarize.rule", "none");
    if (rule == "none") {
        s.binarize = std::monostate{};
    } else if (rule == "keep-classes") {
        auto classes = kv.get_list("binarize.classes");
        if (classes.size() != 2) throw ConfigError("binarize.classes", "keep-classes needs exactly two class names");
        s.binarize = KeepClasses{classes};
    } else if (rule == "threshold") {
        Threshold t;
        t.column = kv.get_string("binarize.column", s.label);
        if (!contains(s.columns, t.column)) throw ConfigError("binarize.column", "'" + t.column + "' is not a listed column");
        if (!kv.contains("binarize.threshold")) throw ConfigError("binarize.threshold", "required field missing");
        t.threshold = kv.get_real("binarize.threshold", 0.0);
        s.binarize = t;
    } else {
        throw ConfigError("binarize.rule", "expected none, keep-classes or threshold, got '" + rule + "'");
    }
    return s;
}

Schema Schema::read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open schema file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

Dataset load_uci(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string() + " (expected UCI file '" + schema.file + "')");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_uci_text(buf.str(), schema);
}

Dataset load_uci_text(const std::string& text, const Schema& schema) {
    const std::size_t n_cols = schema.columns.size();
    std::size_t label_col = 0;
    for (std::size_t c = 0; c < n_cols; ++c)
        if (schema.columns[c] == schema.label) label_col = c;

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> row_lines;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line, schema.delimiter);
        if (fields.size() != n_cols)
            throw ParseError("expected " + std::to_string(n_cols) + " fields, found " + std::to_string(fields.size()), line_no);
        for (const auto& f : fields)
            if (f.empty() || f == "?") throw ParseError("missing value", line_no);
        rows.push_back(std::move(fields));
        row_lines.push_back(line_no);
    }
    if (rows.empty()) throw ParseError("no data rows in " + schema.name);

    // Class index.
    std::vector<std::string> classes = schema.classes;
    if (classes.empty()) {
        std::set<std::string> seen;
        for (const auto& r : rows) seen.insert(r[label_col]);
        classes.assign(seen.begin(), seen.end());
        sort_values(classes);
    }
    std::map<std::string, int> class_index;
    for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = static_cast<int>(i);

    // Feature layout: numeric columns map to one output column, categorical ones expand one-hot.
    struct Source {
        std::size_t column;
        std::optional<std::string> level;  // set for one-hot columns
    };
    std::vector<Source> sources;
    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < n_cols; ++c) {
        const auto& col = schema.columns[c];
        if (c == label_col || contains(schema.drop, col)) continue;
        if (contains(schema.categorical, col)) {
            std::set<std::string> seen;
            for (const auto& r : rows) seen.insert(r[c]);
            std::vector<std::string> levels(seen.begin(), seen.end());
            sort_values(levels);
            for (const auto& level : levels) {
                sources.push_back({c, level});
                feature_names.push_back(col + "=" + level);
            }
        } else {
            sources.push_back({c, std::nullopt});
            feature_names.push_back(col);
        }
    }

    Dataset d;
    d.name = schema.name;
    d.class_names = classes;
    d.n_classes = static_cast<int>(classes.size());
    d.feature_names = std::move(feature_names);
    d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(sources.size()));
    d.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        auto it = class_index.find(r[label_col]);
        if (it == class_index.end())
            throw SchemaError("unknown class value '" + r[label_col] + "' at line " + std::to_string(row_lines[i]));
        d.labels.push_back(it->second);
        for (std::size_t j = 0; j < sources.size(); ++j) {
            const auto& src = sources[j];
            double v = 0;
            if (src.level) {
                v = r[src.column] == *src.level ? 1.0 : 0.0;
            } else {
                auto parsed = parse_double(r[src.column]);
                if (!parsed || !std::isfinite(*parsed))
                    throw ParseError("column '" + schema.columns[src.column] + "': not a number '" + r[src.column] + "'",
                                     row_lines[i]);
                v = *parsed;
            }
            d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    if (d.n_classes < 2) throw SchemaError(schema.name + ": need at least 2 classes");
    return d;
}

Dataset binarize(const Dataset& d, const BinarizeRule& rule) {
    if (std::holds_alternative<std::monostate>(rule)) return d;

    if (const auto* keep = std::get_if<KeepClasses>(&rule)) {
        if (keep->classes.size() != 2) throw SchemaError("keep-classes needs exactly two classes");
        std::map<int, int> relabel;
        for (std::size_t k = 0; k < keep->classes.size(); ++k) {
            auto it = std::find(d.class_names.begin(), d.class_names.end(), keep->classes[k]);
            if (it != d.class_names.end()) relabel[static_cast<int>(it - d.class_names.begin())] = static_cast<int>(k);
        }
        std::vector<std::size_t> rows;
        std::set<int> surviving;
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto it = relabel.find(d.labels[i]);
            if (it == relabel.end()) continue;
            rows.push_back(i);
            surviving.insert(it->second);
        }
        if (surviving.size() < 2)
            throw SchemaError("keep-classes leaves " + std::to_string(surviving.size()) + " class(es) with instances");
        Dataset out = d.subset(rows);
        for (auto& y : out.labels) y = relabel.at(y);
        out.n_classes = 2;
        out.class_names = keep->classes;
        return out;
    }

    const auto& t = std::get<Threshold>(rule);
    std::vector<double> values(d.size());
    auto feature = std::find(d.feature_names.begin(), d.feature_names.end(), t.column);
    if (feature != d.feature_names.end()) {
        auto col = static_cast<Eigen::Index>(feature - d.feature_names.begin());
        for (std::size_t i = 0; i < d.size(); ++i) values[i] = d.features(static_cast<Eigen::Index>(i), col);
    } else {
        // threshold on the label: class names must be numeric
        std::vector<double> class_values;
        for (const auto& name : d.class_names) {
            auto v = parse_double(name);
            if (!v) throw SchemaError("threshold on '" + t.column + "' needs numeric class values, got '" + name + "'");
            class_values.push_back(*v);
        }
        for (std::size_t i = 0; i < d.size(); ++i) values[i] = class_values[static_cast<std::size_t>(d.labels[i])];
    }
    Dataset out = d;
    std::set<int> present;
    for (std::size_t i = 0; i < d.size(); ++i) {
        out.labels[i] = values[i] <= t.threshold ? 0 : 1;
        present.insert(out.labels[i]);
    }
    if (present.size() < 2) throw SchemaError("threshold " + std::to_string(t.threshold) + " leaves a single class");
    out.n_classes = 2;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", t.threshold);
    out.class_names = {t.column + "<=" + buf, t.column + ">" + buf};
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    const std::size_t n = d.size();
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    if (n_train < static_cast<std::size_t>(d.n_classes))
        throw std::invalid_argument("floor(train_fraction * n) = " + std::to_string(n_train) + " is below n_classes");
    if (spec.stratified && n_train == n) throw std::invalid_argument("stratified split would leave the test split empty");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(spec.seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::size_t> train_rows, test_rows;
    if (!spec.stratified) {
        train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
        test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    } else {
        // Per-class quota floor(f * n_c), remainder to the largest fractional parts.
        std::vector<std::size_t> counts(static_cast<std::size_t>(d.n_classes), 0);
        for (int y : d.labels) ++counts[static_cast<std::size_t>(y)];
        std::vector<std::size_t> quota(counts.size());
        std::vector<std::pair<double, std::size_t>> frac;
        std::size_t assigned = 0;
        for (std::size_t c = 0; c < counts.size(); ++c) {
            double exact = spec.train_fraction * static_cast<double>(counts[c]);
            quota[c] = static_cast<std::size_t>(std::floor(exact));
            assigned += quota[c];
            frac.emplace_back(exact - std::floor(exact), c);
        }
        std::stable_sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; assigned < n_train && i < frac.size(); ++i, ++assigned) ++quota[frac[i].second];
        for (auto row : perm) {
            auto& q = quota[static_cast<std::size_t>(d.labels[row])];
            if (q > 0) {
                train_rows.push_back(row);
                --q;
            } else {
                test_rows.push_back(row);
            }
        }
    }
    return {d.subset(train_rows), d.subset(test_rows)};
}

Normalized normalize(const Dataset& train, const Dataset& test) {
    if (train.size() == 0) throw std::invalid_argument("normalize: empty training split");
    const auto n = static_cast<double>(train.size());
    NormalizationStats stats;
    stats.mean = train.features.colwise().mean().transpose();
    stats.scale = Eigen::VectorXd::Zero(train.features.cols());
    if (train.size() > 1) {
        for (Eigen::Index j = 0; j < train.features.cols(); ++j) {
            double ss = (train.features.col(j).array() - stats.mean(j)).square().sum();
            double sd = std::sqrt(ss / (n - 1.0));
            // treat round-off spread of a constant column as constant
            if (sd > 1e-12 * std::max(1.0, std::abs(stats.mean(j)))) stats.scale(j) = sd;
        }
    }
    Normalized out{train, test, stats};
    out.train.features = apply_normalization(train.features, stats);
    out.test.features = apply_normalization(test.features, stats);
    return out;
}

Eigen::MatrixXd apply_normalization(const Eigen::MatrixXd& x, const NormalizationStats& stats) {
    if (x.cols() != stats.mean.size()) throw DimensionError("normalization: feature count mismatch");
    Eigen::MatrixXd out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (stats.scale(j) > 0.0) {
            out.col(j) = (x.col(j).array() - stats.mean(j)) / stats.scale(j);
        } else {
            out.col(j).setZero();
        }
    }
    return out;
}

std::string to_canonical(const Dataset& d) {
    std::string out = std::to_string(d.size()) + " " + std::to_string(d.n_features()) + " " + std::to_string(d.n_classes) + "\n";
    char buf[40];
    for (std::size_t i = 0; i < d.size(); ++i) {
        out += std::to_string(d.labels[i]);
        for (Eigen::Index j = 0; j < d.features.cols(); ++j) {
            std::snprintf(buf, sizeof buf, " %.17g", d.features(static_cast<Eigen::Index>(i), j));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void save_canonical(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_canonical(d);
}

Dataset load_canonical(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    auto name = path.filename().string();
    if (auto dot = name.find('.'); dot != std::string::npos) name.resize(dot);
    return parse_canonical(buf.str(), name);
}

Dataset parse_canonical(const std::string& text, std::string name) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty canonical dataset", 1);
    std::istringstream header(line);
    long long n = -1, p = -1, c = -1;
    if (!(header >> n >> p >> c) || n < 0 || p < 0 || c < 2) throw ParseError("bad header, expected 'n p c'", 1);

    Dataset d;
    d.name = std::move(name);
    d.n_classes = static_cast<int>(c);
    for (long long k = 0; k < c; ++k) d.class_names.push_back(std::to_string(k));
    for (long long j = 0; j < p; ++j) d.feature_names.push_back("x" + std::to_string(j));
    d.features.resize(n, p);
    d.labels.reserve(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw ParseError("expected " + std::to_string(n) + " rows", static_cast<std::size_t>(i + 2));
        std::istringstream row(line);
        std::string tok;
        std::vector<std::string> toks;
        while (row >> tok) toks.push_back(tok);
        if (toks.size() != static_cast<std::size_t>(p + 1))
            throw ParseError("expected " + std::to_string(p + 1) + " fields", static_cast<std::size_t>(i + 2));
        int label = 0;
        auto [ptr, ec] = std::from_chars(toks[0].data(), toks[0].data() + toks[0].size(), label);
        if (ec != std::errc{} || ptr != toks[0].data() + toks[0].size() || label < 0 || label >= c)
            throw ParseError("bad label '" + toks[0] + "'", static_cast<std::size_t>(i + 2));
        d.labels.push_back(label);
        for (long long j = 0; j < p; ++j) {
            auto v = parse_double(toks[static_cast<std::size_t>(j + 1)]);
            if (!v) throw ParseError("bad value '" + toks[static_cast<std::size_t>(j + 1)] + "'", static_cast<std::size_t>(i + 2));
            d.features(i, j) = *v;
        }
    }
    return d;
}

PreparedSplit prepare_dataset(const std::filesystem::path& raw_file, const Schema& schema, const SplitSpec& spec) {
    Dataset d = binarize(load_uci(raw_file, schema), schema.binarize);
    d.validate();
    auto [train, test] = split(d, spec);
    auto norm = normalize(train, test);
    return {std::move(norm.train), std::move(norm.test), std::move(norm.stats)};
}

}  // namespace saea
