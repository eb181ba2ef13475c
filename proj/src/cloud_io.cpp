#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qrect/pointset.hpp"

namespace qrect {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto a = f.find_first_not_of(" \t");
        const auto b = f.find_last_not_of(" \t");
        f = (a == std::string::npos) ? std::string() : f.substr(a, b - a + 1);
    }
    return out;
}

bool to_double(const std::string& s, double& v) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    return ec == std::errc() && ptr == end;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

MetricSpec metric_from(const std::string& kind, int n) {
    if (n < 1) throw SchemaError("metric n must be >= 1");
    if (kind == "euclidean") return MetricSpec::euclidean(n);
    if (kind == "heisenberg") return MetricSpec::heisenberg(n);
    throw SchemaError("unknown metric kind '" + kind + "'");
}

WeightedPointCloud parse_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(0, e.what());
    }
    try {
        std::string kind;
        int n = 0;
        if (j.contains("metric") && j["metric"].is_object()) {
            kind = j["metric"].at("kind").get<std::string>();
            n = j["metric"].at("n").get<int>();
        } else {
            kind = j.at("metric.kind").get<std::string>();
            n = j.at("metric.n").get<int>();
        }
        WeightedPointCloud c;
        c.metric = metric_from(kind, n);
        c.s = j.at("s").get<double>();
        c.h = j.at("h").get<double>();
        if (j.contains("weight_convention")) c.weight_convention = j["weight_convention"].get<std::string>();
        const auto& pts = j.at("points");
        const auto& ws = j.at("weights");
        if (pts.size() != ws.size()) throw SchemaError("points and weights differ in length");
        c.points.resize(c.metric.dim(), static_cast<Index>(pts.size()));
        c.weights.resize(static_cast<Index>(ws.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].size() != static_cast<std::size_t>(c.metric.dim()))
                throw SchemaError("point " + std::to_string(i) + " has the wrong coordinate count");
            for (int d = 0; d < c.metric.dim(); ++d)
                c.points(d, static_cast<Index>(i)) = pts[i][d].get<double>();
            c.weights(static_cast<Index>(i)) = ws[i].get<double>();
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(e.what());
    }
}

void write_json(const WeightedPointCloud& c, std::ostream& out) {
    nlohmann::json j;
    j["metric"] = {{"kind", c.metric.kind_name()}, {"n", c.metric.n}};
    j["s"] = c.s;
    j["h"] = c.h;
    j["weight_convention"] = c.weight_convention;
    nlohmann::json pts = nlohmann::json::array();
    for (Index i = 0; i < c.size(); ++i) {
        nlohmann::json p = nlohmann::json::array();
        for (Index d = 0; d < c.points.rows(); ++d) p.push_back(c.points(d, i));
        pts.push_back(std::move(p));
    }
    j["points"] = std::move(pts);
    j["weights"] = std::vector<double>(c.weights.data(), c.weights.data() + c.size());
    out << j.dump() << '\n';
}

bool is_json(const std::filesystem::path& p) { return p.extension() == ".json"; }

}  // namespace

WeightedPointCloud parse_cloud_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty cloud file");
    if (line.empty() || line[0] != '#') throw SchemaError("line 1 must be a '#' metadata header");
    auto meta = split_commas(line.substr(1));
    if (meta.size() < 7 || meta.size() % 2 == 0 || meta[0] != "metric" || meta[3] != "s" || meta[5] != "h")
        throw SchemaError("metadata header must read 'metric,<kind>,<n>,s,<s>,h,<h>'");
    double n_val = 0.0;
    WeightedPointCloud c;
    if (!to_double(meta[2], n_val) || n_val != std::floor(n_val)) throw ParseError(1, "bad metric n");
    c.metric = metric_from(meta[1], static_cast<int>(n_val));
    if (!to_double(meta[4], c.s)) throw ParseError(1, "bad s");
    if (!to_double(meta[6], c.h)) throw ParseError(1, "bad h");
    for (std::size_t i = 7; i + 1 < meta.size(); i += 2)
        if (meta[i] == "weights") c.weight_convention = meta[i + 1];

    if (!std::getline(in, line)) throw SchemaError("missing column header");
    const auto cols = split_commas(line);
    const int dim = c.metric.dim();
    if (cols.empty() || cols.back() != "weight") throw SchemaError("missing weight column");
    if (static_cast<int>(cols.size()) != dim + 1)
        throw SchemaError("expected " + std::to_string(dim) + " coordinate columns for " + c.metric.kind_name() +
                          "(" + std::to_string(c.metric.n) + "), found " + std::to_string(cols.size() - 1));
    for (int d = 0; d < dim; ++d)
        if (cols[d] != "c" + std::to_string(d + 1)) throw SchemaError("unexpected column name '" + cols[d] + "'");

    std::vector<double> vals;
    std::size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_commas(line);
        if (static_cast<int>(f.size()) != dim + 1)
            throw ParseError(lineno, "expected " + std::to_string(dim + 1) + " fields");
        for (const auto& s : f) {
            double v = 0.0;
            if (!to_double(s, v)) throw ParseError(lineno, "bad number '" + s + "'");
            vals.push_back(v);
        }
    }
    const Index count = static_cast<Index>(vals.size()) / (dim + 1);
    c.points.resize(dim, count);
    c.weights.resize(count);
    for (Index i = 0; i < count; ++i) {
        for (int d = 0; d < dim; ++d) c.points(d, i) = vals[i * (dim + 1) + d];
        c.weights(i) = vals[i * (dim + 1) + dim];
    }
    return c;
}

void write_cloud_csv(const WeightedPointCloud& c, std::ostream& out) {
    out << "# metric," << c.metric.kind_name() << ',' << c.metric.n << ",s," << fmt(c.s) << ",h," << fmt(c.h)
        << ",weights," << c.weight_convention << '\n';
    for (Index d = 0; d < c.points.rows(); ++d) out << 'c' << d + 1 << ',';
    out << "weight\n";
    for (Index i = 0; i < c.size(); ++i) {
        for (Index d = 0; d < c.points.rows(); ++d) out << fmt(c.points(d, i)) << ',';
        out << fmt(c.weights(i)) << '\n';
    }
}

WeightedPointCloud read_cloud(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open " + path.string());
    WeightedPointCloud c = is_json(path) ? parse_json(in) : parse_cloud_csv(in);
    c.validate();
    return c;
}

void write_cloud(const WeightedPointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write " + path.string());
    if (is_json(path)) write_json(cloud, out);
    else write_cloud_csv(cloud, out);
    if (!out) throw std::ios_base::failure("write failed for " + path.string());
}

}  // namespace qrect
