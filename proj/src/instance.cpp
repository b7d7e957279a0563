#include "mdm/instance.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace mdm {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

double need_param(const GeneratorSpec& spec, const std::string& key) {
    auto it = spec.params.find(key);
    if (it == spec.params.end())
        throw std::invalid_argument("generator '" + spec.shape + "' needs parameter '" + key + "'");
    return it->second;
}

std::vector<Point2> gen_circle(const GeneratorSpec& spec) {
    const double R = need_param(spec, "R");
    if (!(R > 0)) throw std::invalid_argument("circle radius must be positive");
    const int n = spec.sample_count;
    if (n < 1) throw std::invalid_argument("sample_count must be at least 1");
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
        pts.push_back({R * std::cos(th), R * std::sin(th)});
    }
    return pts;
}

std::vector<Point2> gen_polygon(const GeneratorSpec& spec) {
    const int k = static_cast<int>(std::lround(need_param(spec, "sides")));
    const double side = need_param(spec, "side");
    if (k < 3) throw std::invalid_argument("polygon needs at least 3 sides");
    if (!(side > 0)) throw std::invalid_argument("polygon side must be positive");
    const int n = spec.sample_count;
    if (n < 1) throw std::invalid_argument("sample_count must be at least 1");

    // Regular k-gon centered at the origin; the angular offset pi/k makes the
    // square axis-aligned with corners (+-side/2, +-side/2).
    const double circ = side / (2.0 * std::sin(kPi / k));
    std::vector<Point2> corners;
    corners.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const double th = kPi / k + 2.0 * kPi * static_cast<double>(j) / static_cast<double>(k);
        corners.push_back({circ * std::cos(th), circ * std::sin(th)});
    }

    const double perimeter = side * k;
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double s = perimeter * static_cast<double>(i) / static_cast<double>(n);
        int edge = static_cast<int>(s / side);
        if (edge >= k) edge = k - 1;
        const double t = (s - edge * side) / side;
        const Point2 a = corners[static_cast<std::size_t>(edge)];
        const Point2 b = corners[static_cast<std::size_t>((edge + 1) % k)];
        pts.push_back({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
    }
    return pts;
}

std::vector<Point2> gen_segment_pair(const GeneratorSpec& spec) {
    const double d = need_param(spec, "d");
    if (!(d > 0)) throw std::invalid_argument("segment_pair separation must be positive");
    return {{0.0, 0.0}, {d, 0.0}};
}

std::vector<Point2> gen_grid(const GeneratorSpec& spec) {
    const int nx = static_cast<int>(std::lround(need_param(spec, "nx")));
    const int ny = static_cast<int>(std::lround(need_param(spec, "ny")));
    const double spacing = need_param(spec, "spacing");
    if (nx < 1 || ny < 1) throw std::invalid_argument("grid dimensions must be positive");
    if (!(spacing > 0)) throw std::invalid_argument("grid spacing must be positive");
    const double x0 = -0.5 * spacing * (nx - 1);
    const double y0 = -0.5 * spacing * (ny - 1);
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.push_back({x0 + spacing * i, y0 + spacing * j});
    return pts;
}

json generator_to_json(const GeneratorSpec& g) {
    json p = json::object();
    for (const auto& [k, v] : g.params) p[k] = v;
    return json{{"shape", g.shape},
                {"params", p},
                {"sample_count", g.sample_count},
                {"seed", g.seed}};
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

GeneratorSpec generator_from_json(const json& j) {
    GeneratorSpec g;
    g.shape = j.at("shape").get<std::string>();
    if (j.contains("params"))
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
            g.params[it.key()] = it.value().get<double>();
    g.sample_count = j.value("sample_count", 1);
    g.seed = j.value("seed", std::uint64_t{0});
    return g;
}

}  // namespace

std::string InstanceFile::to_json_string() const {
    json pts = json::array();
    for (const Point2& p : points) pts.push_back(json::array({p.x, p.y}));
    json j{{"version", version}, {"kind", "instance"}, {"r", r}, {"points", pts}};
    if (generator) j["generator"] = generator_to_json(*generator);
    return j.dump(2);
}

InstanceFile InstanceFile::from_json_string(const std::string& text) {
    json j = json::parse(text);
    InstanceFile f;
    f.version = j.value("version", 1);
    if (j.value("kind", std::string{"instance"}) != "instance")
        throw std::invalid_argument("not an instance file");
    f.r = j.at("r").get<double>();
    for (const auto& p : j.at("points")) {
        if (!p.is_array() || p.size() != 2)
            throw std::invalid_argument("instance points must be [x, y] pairs");
        f.points.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    if (f.points.empty()) throw std::invalid_argument("instance has no points");
    if (!(f.r > 0) || !std::isfinite(f.r))
        throw std::invalid_argument("instance r must be positive and finite");
    if (j.contains("generator") && !j["generator"].is_null())
        f.generator = generator_from_json(j["generator"]);
    return f;
}

InstanceFile generate_instance(const GeneratorSpec& spec, double r) {
    if (!(r > 0) || !std::isfinite(r)) throw std::invalid_argument("r must be positive and finite");
    InstanceFile f;
    f.r = r;
    f.generator = spec;
    if (spec.shape == "circle")
        f.points = gen_circle(spec);
    else if (spec.shape == "polygon")
        f.points = gen_polygon(spec);
    else if (spec.shape == "segment_pair")
        f.points = gen_segment_pair(spec);
    else if (spec.shape == "grid")
        f.points = gen_grid(spec);
    else
        throw std::invalid_argument("unknown generator shape '" + spec.shape + "'");
    return f;
}

std::string RunManifest::to_json_string() const {
    json in = json::object(), out = json::object();
    for (const auto& [k, v] : input_hashes) in[k] = v;
    for (const auto& [k, v] : output_hashes) out[k] = v;
    json j{{"version", 1},
           {"kind", "run_manifest"},
           {"tool_version", tool_version},
           {"command", command},
           {"seed", seed},
           {"config_hash", hex64(config_hash)},
           {"inputs", in},
           {"outputs", out}};
    return j.dump(2);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) { return hex64(fnv1a64(bytes)); }

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace mdm
