#include "flatprox/golden.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "flatprox/process.hpp"
#include "flatprox/proximity.hpp"
#include "flatprox/random.hpp"
#include "flatprox/window.hpp"

namespace flatprox {
namespace {

using json = nlohmann::ordered_json;

constexpr double kFlatTol = 1e-12;

FlatProcessSample as_sample(const GoldenCase& c) {
  FlatProcessSample s;
  s.flats = c.flats;
  s.region.enclosing_radius = c.enclosing_radius;
  s.params = c.params;
  return s;
}

struct Outputs {
  std::int64_t count = 0;
  std::int64_t rejected = 0;
  std::vector<GoldenPair> pairs;
};

Outputs compute(const GoldenCase& c, double tol) {
  const Window K = Window::parse(c.window_spec, c.params.d, c.rho);
  const auto sample = as_sample(c);
  const auto pc = proximity_count(sample, K, c.params.delta, tol);
  const auto ordered = distance_point_process(sample, K, c.u_max, tol);
  Outputs out{pc.count, pc.rejected_parallel_pairs, {}};
  for (const auto& r : ordered.records)
    out.pairs.push_back({r.first_index, r.second_index, r.distance});
  return out;
}

void fill_expected(GoldenCase& c) {
  auto out = compute(c, kGeneralPositionTol);
  c.expected_count = out.count;
  c.expected_rejected = out.rejected;
  c.expected_pairs = std::move(out.pairs);
}

double region_radius(const ModelParams& p, const std::string& window, double rho, double u_max) {
  return enclosing_radius_for_proximity(Window::parse(window, p.d, rho), std::max(p.delta, u_max));
}

std::vector<AffineFlatd> draw_flats(const GoldenCase& c) {
  Rng rng = make_rng(c.seed, {0x676f6c64ULL});
  return sample_process(SampleRegion{c.enclosing_radius}, c.params, rng).flats;
}

json flat_json(const AffineFlatd& f) {
  std::vector<double> basis(f.basis().data(), f.basis().data() + f.basis().size());
  std::vector<double> anchor(f.anchor().data(), f.anchor().data() + f.anchor().size());
  return {{"basis", basis}, {"anchor", anchor}};
}

AffineFlatd flat_from_json(const json& j, int d, int k) {
  const auto basis = j.at("basis").get<std::vector<double>>();
  const auto anchor = j.at("anchor").get<std::vector<double>>();
  if (basis.size() != static_cast<std::size_t>(d * k) || anchor.size() != static_cast<std::size_t>(d))
    throw std::invalid_argument("golden flat has the wrong shape");
  BasisX<double> B(d, k);
  PointX<double> a(d);
  std::copy(basis.begin(), basis.end(), B.data());
  std::copy(anchor.begin(), anchor.end(), a.data());
  return AffineFlatd::from_canonical(std::move(B), std::move(a));
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

double max_flat_difference(const AffineFlatd& a, const AffineFlatd& b) {
  if (a.ambient_dim() != b.ambient_dim() || a.flat_dim() != b.flat_dim())
    return std::numeric_limits<double>::infinity();
  return std::max((a.basis() - b.basis()).cwiseAbs().maxCoeff(),
                  (a.anchor() - b.anchor()).cwiseAbs().maxCoeff());
}

ModelParams params_of(int d, int k, double t, double delta) {
  ModelParams p;
  p.d = d;
  p.k = k;
  p.t = t;
  p.delta = delta;
  return p;
}

AffineFlatd line3(double angle, double z) {
  BasisX<double> B(3, 1);
  B << std::cos(angle), std::sin(angle), 0.0;
  PointX<double> a(3);
  a << 0.0, 0.0, z;
  return canonicalize<double>(B, a);
}

}  // namespace

GoldenCase make_sampled_case(std::string name, const ModelParams& params, std::string window_spec,
                             double rho, std::uint64_t seed, double u_max) {
  GoldenCase c;
  c.name = std::move(name);
  c.params = params;
  c.window_spec = std::move(window_spec);
  c.rho = rho;
  c.seed = seed;
  c.u_max = u_max;
  c.enclosing_radius = region_radius(params, c.window_spec, rho, u_max);
  c.flats = draw_flats(c);
  fill_expected(c);
  return c;
}

GoldenCase make_constructed_case(std::string name, const ModelParams& params,
                                 std::string window_spec, double rho, double u_max,
                                 std::vector<AffineFlatd> flats) {
  GoldenCase c;
  c.name = std::move(name);
  c.params = params;
  c.window_spec = std::move(window_spec);
  c.rho = rho;
  c.u_max = u_max;
  c.constructed = true;
  c.enclosing_radius = region_radius(params, c.window_spec, rho, u_max);
  for (const auto& f : flats)
    if (f.offset_norm() > c.enclosing_radius)
      throw std::invalid_argument("constructed flat misses the sampling region");
  c.flats = std::move(flats);
  fill_expected(c);
  return c;
}

std::string golden_to_json(const GoldenCase& c) {
  json flats = json::array();
  for (const auto& f : c.flats) flats.push_back(flat_json(f));
  json pairs = json::array();
  for (const auto& p : c.expected_pairs)
    pairs.push_back({{"i", p.first_index}, {"j", p.second_index}, {"distance", p.distance}});
  json out = {{"schema", "flatprox.golden/1"},
              {"name", c.name},
              {"d", c.params.d},
              {"k", c.params.k},
              {"t", c.params.t},
              {"delta", c.params.delta},
              {"window", c.window_spec},
              {"rho", c.rho},
              {"seed", c.seed},
              {"u_max", c.u_max},
              {"constructed", c.constructed},
              {"enclosing_radius", c.enclosing_radius},
              {"flats", flats},
              {"expected", {{"count", c.expected_count},
                            {"rejected_parallel_pairs", c.expected_rejected},
                            {"pairs", pairs}}}};
  return out.dump(1) + "\n";
}

GoldenCase golden_from_json(const std::string& text) {
  const json j = json::parse(text);
  GoldenCase c;
  c.name = j.at("name").get<std::string>();
  c.params = params_of(j.at("d").get<int>(), j.at("k").get<int>(), j.at("t").get<double>(),
                       j.at("delta").get<double>());
  c.params.validate();
  c.window_spec = j.at("window").get<std::string>();
  c.rho = j.at("rho").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.u_max = j.at("u_max").get<double>();
  c.constructed = j.at("constructed").get<bool>();
  c.enclosing_radius = j.at("enclosing_radius").get<double>();
  for (const auto& f : j.at("flats")) c.flats.push_back(flat_from_json(f, c.params.d, c.params.k));
  const auto& e = j.at("expected");
  c.expected_count = e.at("count").get<std::int64_t>();
  c.expected_rejected = e.at("rejected_parallel_pairs").get<std::int64_t>();
  for (const auto& p : e.at("pairs"))
    c.expected_pairs.push_back(
        {p.at("i").get<int>(), p.at("j").get<int>(), p.at("distance").get<double>()});
  return c;
}

std::vector<GoldenDiff> diff_golden_case(const GoldenCase& c, double distance_tol,
                                         double general_position_tol) {
  std::vector<GoldenDiff> diffs;
  auto add = [&](std::string field, std::string detail) {
    diffs.push_back({c.name, std::move(field), std::move(detail)});
  };
  if (!c.constructed) {
    const auto redrawn = draw_flats(c);
    if (redrawn.size() != c.flats.size()) {
      add("flats", "redrawn " + std::to_string(redrawn.size()) + " flats, stored " +
                       std::to_string(c.flats.size()));
    } else {
      for (std::size_t i = 0; i < redrawn.size(); ++i) {
        const double diff = max_flat_difference(redrawn[i], c.flats[i]);
        if (!(diff <= kFlatTol)) {
          add("flats[" + std::to_string(i) + "]", "redrawn flat differs by " + std::to_string(diff));
          break;
        }
      }
    }
  }
  const auto out = compute(c, general_position_tol);
  if (out.count != c.expected_count)
    add("count", std::to_string(out.count) + " != " + std::to_string(c.expected_count));
  if (out.rejected != c.expected_rejected)
    add("rejected_parallel_pairs",
        std::to_string(out.rejected) + " != " + std::to_string(c.expected_rejected));
  if (out.pairs.size() != c.expected_pairs.size()) {
    add("pairs", std::to_string(out.pairs.size()) + " pairs, expected " +
                     std::to_string(c.expected_pairs.size()));
    return diffs;
  }
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    const auto& a = out.pairs[i];
    const auto& b = c.expected_pairs[i];
    if (a.first_index != b.first_index || a.second_index != b.second_index ||
        !(std::abs(a.distance - b.distance) <= distance_tol)) {
      std::ostringstream os;
      os.precision(17);
      os << "(" << a.first_index << "," << a.second_index << "," << a.distance << ") vs ("
         << b.first_index << "," << b.second_index << "," << b.distance << ")";
      add("pairs[" + std::to_string(i) + "]", os.str());
    }
  }
  return diffs;
}

GoldenReport regenerate_golden(const std::filesystem::path& corpus, double distance_tol,
                               double general_position_tol) {
  const json manifest = json::parse(read_file(corpus / "manifest.json"));
  GoldenReport report;
  report.recorded_runtime_seconds = manifest.value("runtime_seconds", 0.0);
  for (const auto& file : manifest.at("cases")) {
    const auto c = golden_from_json(read_file(corpus / file.get<std::string>()));
    auto diffs = diff_golden_case(c, distance_tol, general_position_tol);
    report.diffs.insert(report.diffs.end(), diffs.begin(), diffs.end());
    ++report.cases;
  }
  return report;
}

std::vector<GoldenCase> default_golden_cases() {
  std::vector<GoldenCase> cases;
  struct Sampled {
    const char* name;
    int d, k;
    double t, delta;
    const char* window;
    double rho;
    std::uint64_t seed;
    double u_max;
  };
  const Sampled sampled[] = {
      {"lines_d3_ball", 3, 1, 1.0, 1.0, "ball:1", 1.0, 1, 1.0},
      {"lines_d3_ball_rho2", 3, 1, 1.0, 1.0, "ball:1", 2.0, 2, 0.5},
      {"lines_d3_ball_small_delta", 3, 1, 4.0, 0.1, "ball:1", 1.0, 3, 0.2},
      {"lines_d3_box", 3, 1, 1.0, 0.5, "box:1,0.5,0.25", 1.5, 4, 0.5},
      {"lines_d3_cube_dense", 3, 1, 6.0, 0.25, "box:0.5,0.5,0.5", 1.0, 5, 0.25},
      {"lines_d4_ball", 4, 1, 1.0, 1.0, "ball:1", 1.0, 6, 1.0},
      {"lines_d4_box", 4, 1, 2.0, 0.5, "box:1,1,0.5,0.5", 1.0, 7, 0.75},
      {"lines_d5_ball", 5, 1, 1.0, 1.0, "ball:1.2", 1.0, 8, 1.0},
      {"planes_d5_ball", 5, 2, 1.0, 1.0, "ball:1", 1.0, 9, 1.0},
      {"planes_d5_box", 5, 2, 0.5, 0.8, "box:1,1,1,0.5,0.5", 1.0, 10, 0.8},
      {"planes_d6_ball", 6, 2, 0.5, 1.0, "ball:1", 1.0, 11, 1.0},
      {"lines_d6_ball", 6, 1, 0.3, 1.0, "ball:1", 1.0, 12, 1.5},
      {"flats3_d7_ball", 7, 3, 0.3, 1.0, "ball:1", 1.0, 13, 1.0},
      {"lines_d3_ball_delta0", 3, 1, 1.0, 0.0, "ball:1", 1.0, 14, 0.5},
  };
  for (const auto& s : sampled)
    cases.push_back(make_sampled_case(s.name, params_of(s.d, s.k, s.t, s.delta), s.window, s.rho,
                                      s.seed, s.u_max));

  const double pi = std::numbers::pi;
  // [M, L] = sin(angle); accepted while sin(angle) exceeds the general-position tolerance
  cases.push_back(make_constructed_case("near_parallel_lines_1e-7", params_of(3, 1, 1.0, 1.0),
                                        "ball:1", 1.0, 1.0, {line3(0.0, 0.2), line3(1e-7, -0.2)}));
  cases.push_back(make_constructed_case("near_parallel_lines_1e-11", params_of(3, 1, 1.0, 1.0),
                                        "ball:1", 1.0, 1.0, {line3(0.0, 0.2), line3(1e-11, -0.2)}));
  cases.push_back(make_constructed_case("parallel_lines", params_of(3, 1, 1.0, 1.0), "ball:1", 1.0,
                                        1.0, {line3(0.3, 0.1), line3(0.3, -0.3)}));
  cases.push_back(make_constructed_case(
      "line_bundle_with_orthogonal", params_of(3, 1, 1.0, 1.0), "ball:1", 1.0, 1.0,
      {line3(0.0, 0.0), line3(5e-8, 0.4), line3(1e-6, -0.4), line3(0.5 * pi, 0.25),
       line3(0.25 * pi, -0.1)}));
  {
    BasisX<double> B1(5, 2), B2(5, 2);
    B1.setZero();
    B2.setZero();
    B1(0, 0) = 1.0;
    B1(1, 1) = 1.0;
    const double eps = 1e-6;
    B2(0, 0) = 1.0;
    B2(1, 1) = std::cos(eps);
    B2(2, 1) = std::sin(eps);
    PointX<double> a1(5), a2(5);
    a1 << 0.0, 0.0, 0.0, 0.3, 0.0;
    a2 << 0.0, 0.0, 0.0, -0.3, 0.1;
    cases.push_back(make_constructed_case(
        "near_parallel_planes_d5", params_of(5, 2, 1.0, 1.0), "ball:1", 1.0, 1.0,
        {canonicalize<double>(B1, a1), canonicalize<double>(B2, a2)}));
  }
  {
    // non-perpendicular offset: the closest points sit far along the lines
    BasisX<double> B1(4, 1), B2(4, 1);
    B1 << 1.0, 0.0, 0.0, 0.0;
    B2 << 1.0, 1e-4, 0.0, 0.0;
    PointX<double> a1(4), a2(4);
    a1 << 0.0, 0.0, 0.2, 0.0;
    a2 << 0.0, 0.05, -0.2, 0.1;
    cases.push_back(make_constructed_case(
        "near_parallel_lines_far_midpoint_d4", params_of(4, 1, 1.0, 1.0), "ball:1", 1.0, 1.0,
        {canonicalize<double>(B1, a1), canonicalize<double>(B2, a2)}));
  }
  return cases;
}

void write_golden_corpus(const std::filesystem::path& corpus, const std::vector<GoldenCase>& cases) {
  std::filesystem::create_directories(corpus);
  json files = json::array();
  for (const auto& c : cases) {
    const std::string file = c.name + ".json";
    write_file(corpus / file, golden_to_json(c));
    files.push_back(file);
  }
  json manifest = {{"schema", "flatprox.golden-manifest/1"},
                   {"runtime_budget_seconds", 10.0},
                   {"runtime_seconds", 0.0},
                   {"cases", files}};
  write_file(corpus / "manifest.json", manifest.dump(2) + "\n");
  const auto start = std::chrono::steady_clock::now();
  const auto report = regenerate_golden(corpus);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  if (!report.diffs.empty())
    throw std::logic_error("freshly written corpus does not regenerate cleanly");
  manifest["runtime_seconds"] = elapsed.count();
  write_file(corpus / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace flatprox
