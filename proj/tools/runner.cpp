#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "ifsrecur/covering_sep.hpp"
#include "ifsrecur/dimension_calc.hpp"
#include "ifsrecur/errors.hpp"
#include "ifsrecur/garsia_algebra.hpp"
#include "ifsrecur/ifs_core.hpp"
#include "ifsrecur/json_io.hpp"
#include "ifsrecur/measure_lab.hpp"
#include "ifsrecur/parallel.hpp"
#include "ifsrecur/transversality_mc.hpp"

namespace ifsrecur::cli {

namespace {

// ---------------------------------------------------------------------------
// Config access

long long get_int(const Json& c, const char* key) { return c.at(key).get<long long>(); }
double get_real(const Json& c, const char* key) { return c.at(key).get<double>(); }
std::string get_string(const Json& c, const char* key) { return c.at(key).get<std::string>(); }
bool has(const Json& c, const char* key) { return c.contains(key) && !c.at(key).is_null(); }

std::vector<double> get_reals(const Json& c, const char* key) { return c.at(key).get<std::vector<double>>(); }
std::vector<int> get_ints(const Json& c, const char* key) { return c.at(key).get<std::vector<int>>(); }

int positive_int(const Json& c, const char* key, long long lo = 1, long long hi = std::numeric_limits<int>::max()) {
  const long long v = get_int(c, key);
  require(v >= lo && v <= hi, ErrorKind::Domain,
          std::string(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

std::uint64_t budget_value(const Json& c, const char* key) {
  const long long v = get_int(c, key);
  require(v >= 1, ErrorKind::Domain, std::string(key) + " must be positive");
  return static_cast<std::uint64_t>(v);
}

std::filesystem::path artifact_path(const RunContext& ctx, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : ctx.out_dir / path;
}

AffineIFS load_ifs(const Json& c, ContractionMode mode = ContractionMode::General) {
  return AffineIFS::from_json(read_json_file(get_string(c, "ifs")), mode);
}

std::vector<Mat> diagonal_family(const Json& c) {
  const auto diag = get_reals(c, "diag");
  const int m = positive_int(c, "m", 1, 64);
  require(!diag.empty() && diag.size() <= static_cast<std::size_t>(kMaxDim), ErrorKind::Domain,
          "diag needs 1..4 entries");
  Mat a = Mat::Zero(static_cast<Eigen::Index>(diag.size()), static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
  return std::vector<Mat>(static_cast<std::size_t>(m), a);
}

Shape parse_shape(const std::string& text, int d) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorKind::Config, "shape must look like ball:r or box:h1,h2");
  const std::string kind = text.substr(0, colon);
  std::vector<double> v;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      fail(ErrorKind::Config, "bad shape number \"" + item + "\"");
    }
  }
  if (kind == "ball") {
    require(v.size() == 1, ErrorKind::Config, "ball:r takes one number");
    return Ball{v[0]};
  }
  if (kind == "box") {
    require(v.size() == static_cast<std::size_t>(d), ErrorKind::Config, "box needs one halfwidth per axis");
    Vec h(d);
    for (int i = 0; i < d; ++i) h(i) = v[static_cast<std::size_t>(i)];
    return Box{h};
  }
  fail(ErrorKind::Config, "unknown shape kind \"" + kind + "\"");
}

Eigen::MatrixXd parse_table(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> r;
    std::stringstream cs(row);
    std::string item;
    while (std::getline(cs, item, ',')) {
      try {
        r.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        fail(ErrorKind::Config, "bad table entry \"" + item + "\"");
      }
    }
    rows.push_back(std::move(r));
  }
  require(!rows.empty(), ErrorKind::Config, "empty table");
  Eigen::MatrixXd t(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == rows.size(), ErrorKind::Config, "table must be square");
    for (std::size_t j = 0; j < rows.size(); ++j) t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return t;
}

Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

Json run_lambda(const Json& c, RunContext& ctx) {
  const AffineIFS ifs = load_ifs(c);
  *ctx.console << format_double(ifs.lambda_value()) << "\n";
  return {{"lambda", ifs.lambda_value()}, {"d", ifs.dim()}, {"m", ifs.size()}};
}

Json run_garsia_check(const Json& c, RunContext& ctx) {
  const GarsiaReport r = is_garsia(IntPolynomial::parse(get_string(c, "poly")));
  *ctx.console << to_string(r.verdict) << "\n";
  return r.to_json();
}

Json run_garsia_sep(const Json& c, RunContext&) {
  double lambda = 0.0;
  Json source;
  if (has(c, "poly")) {
    require(!has(c, "lambda"), ErrorKind::Config, "give either poly or lambda, not both");
    const GarsiaReport r = is_garsia(IntPolynomial::parse(get_string(c, "poly")));
    require(r.real_root_in_1_2.has_value(), ErrorKind::Domain, "polynomial has no unique real root in (1,2)");
    lambda = 1.0 / *r.real_root_in_1_2;
    source = {{"poly", r.polynomial.to_string()}, {"verdict", std::string(to_string(r.verdict))}};
  } else {
    require(has(c, "lambda"), ErrorKind::Config, "garsia-sep needs poly or lambda");
    lambda = get_real(c, "lambda");
    source = {{"lambda", lambda}};
  }
  const int n_min = positive_int(c, "n_min", 1, kMaxSeparationLength);
  const int n_max = positive_int(c, "n_max", n_min, kMaxSeparationLength);
  const int w_from = positive_int(c, "window_from", 1, kMaxSeparationLength);
  Json rows = Json::array();
  double inf = std::numeric_limits<double>::infinity();
  double wmin = std::numeric_limits<double>::infinity();
  double wmax = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    const SeparationScan s = separation_scan(lambda, n);
    const double scaled = std::ldexp(s.min, n);
    inf = std::min(inf, scaled);
    if (n >= w_from) {
      wmin = std::min(wmin, scaled);
      wmax = std::max(wmax, scaled);
    }
    rows.push_back({{"n", n},
                    {"separation_min", s.min},
                    {"periodic_separation", s.min / (1.0 - std::pow(lambda, n))},
                    {"scaled", scaled},
                    {"evaluated", s.evaluated},
                    {"argmin", s.argmin}});
  }
  Json window = nullptr;
  if (wmax > 0.0) window = {{"from", std::max(w_from, n_min)}, {"to", n_max}, {"min", wmin}, {"max", wmax}, {"ratio", wmax / wmin}};
  return {{"lambda", lambda}, {"source", source}, {"rows", rows}, {"scaled_inf", inf}, {"scaled_window", window}};
}

Json run_stage(const Json& c, RunContext& ctx, bool recurrence) {
  const AffineIFS ifs = load_ifs(c);
  const int d = ifs.dim();
  const HFamily h = HFamily::parse(get_string(c, "h"));
  TargetSpec spec = recurrence ? TargetSpec::recurrence_ball(h)
                               : TargetSpec::shrinking_ball(h, SymbolicSequence::parse(get_string(c, "center")));
  const int n = positive_int(c, "n", 1, 64);
  const int n_from = positive_int(c, "n_from", 1, n);
  const auto word_budget = budget_value(c, "word_budget");
  const auto cell_budget = budget_value(c, "cell_budget");
  const auto resolution = static_cast<std::uint32_t>(positive_int(c, "resolution", 2, kMaxResolution));

  // the budget covers the whole family, so check it before enumerating anything
  std::uint64_t words = 0;
  for (int l = n_from; l <= n; ++l)
    words += checked_word_count(static_cast<std::uint32_t>(ifs.size()), static_cast<std::uint32_t>(l), word_budget - words);

  std::vector<std::vector<PlacedBody>> levels;
  for (int l = n_from; l <= n; ++l) levels.push_back(stage_bodies(ifs, spec, l, word_budget));

  Window window;
  if (has(c, "window")) {
    const auto w = get_reals(c, "window");
    require(w.size() == static_cast<std::size_t>(2 * d), ErrorKind::Config, "window needs lo..., hi... (2d numbers)");
    window.lo = Vec(d);
    window.hi = Vec(d);
    for (int i = 0; i < d; ++i) {
      window.lo(i) = w[static_cast<std::size_t>(i)];
      window.hi(i) = w[static_cast<std::size_t>(d + i)];
    }
  } else {
    std::vector<PlacedBody> all;
    for (const auto& l : levels) all.insert(all.end(), l.begin(), l.end());
    window = bounding_window(all, 0.0);
  }
  const std::vector<std::uint32_t> res(static_cast<std::size_t>(d), resolution);
  std::vector<PixelMask> masks;
  for (const auto& l : levels) masks.push_back(rasterize(l, window, res, cell_budget));
  const PixelMask& top = masks.back();
  const IntersectionTable table = pairwise_intersection_table(masks);
  const PixelMask family_union = union_mask(masks);

  Json measures = Json::array();
  for (const auto& m : masks) measures.push_back(m.measure());
  Json result;
  result["level"] = n;
  result["mode"] = std::string(to_string(spec.mode));
  result["bodies"] = levels.back().size();
  result["union_measure"] = top.measure();
  result["boundary_error"] = top.boundary_error();
  result["analytic_volume_sum"] = analytic_volume_sum(levels.back());
  result["exact_measure"] = d == 1 ? Json(interval_union_measure(levels.back())) : Json(nullptr);
  result["window"] = {{"lo", vec_json(window.lo)}, {"hi", vec_json(window.hi)}};
  result["cell_volume"] = top.cell_volume();
  result["h_membership"] = std::string(to_string(h.membership()));
  const bool any = std::any_of(masks.begin(), masks.end(), [](const PixelMask& m) { return m.occupied_count() > 0; });
  result["bounds"] = {
      {"kochen_stone", any ? Json(kochen_stone_bound(table)) : Json(nullptr)},
      {"bonferroni", bonferroni_bound(table)},
      {"kochen_stone_le_union", kochen_stone_holds_exactly(table, family_union.occupied_count())},
      {"bonferroni_le_union", bonferroni_holds_exactly(table, family_union.occupied_count())},
  };
  result["family"] = {{"levels", {n_from, n}}, {"measures", measures}, {"union_measure", family_union.measure()}};

  if (has(c, "pgm")) {
    const auto p = artifact_path(ctx, get_string(c, "pgm"));
    write_pgm(top, p);
    result["pgm"] = p.string();
  }
  if (has(c, "csv")) {
    const auto p = artifact_path(ctx, get_string(c, "csv"));
    write_run_length_csv(top, p);
    result["csv"] = p.string();
  }
  return result;
}

Json run_bounds(const Json& c, RunContext&) {
  const Eigen::MatrixXd t = parse_table(get_string(c, "table"));
  Json out{{"kochen_stone", kochen_stone_bound(t)}, {"bonferroni", bonferroni_bound(t)}};
  if (has(c, "union")) {
    const double u = get_real(c, "union");
    out["union"] = u;
    out["kochen_stone_le_union"] = kochen_stone_bound(t) <= u;
    out["bonferroni_le_union"] = bonferroni_bound(t) <= u;
  }
  return out;
}

Json run_cover(const Json& c, RunContext&) {
  const auto rows = read_numeric_csv(get_string(c, "rects"));
  ShrinkingRectangleFamily fam;
  for (const auto& r : rows) {
    require(r.size() % 2 == 0 && !r.empty() && r.size() <= 2 * static_cast<std::size_t>(kMaxDim), ErrorKind::Config,
            "rectangle rows need c_1..c_d, h_1..h_d");
    const auto d = static_cast<Eigen::Index>(r.size() / 2);
    Vec ctr(d);
    Vec hw(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      ctr(i) = r[static_cast<std::size_t>(i)];
      hw(i) = r[static_cast<std::size_t>(d + i)];
    }
    fam.centers.push_back(ctr);
    fam.halfwidths.push_back(hw);
  }
  const auto selected = greedy_disjoint_cover(fam);
  Json out{{"selected", indices_to_json(selected)}, {"count", selected.size()}, {"inputs", fam.size()}};
  const int check = positive_int(c, "check_resolution", 0, kMaxResolution);
  if (check > 0 && fam.size() > 0) {
    out["uncovered_cells"] = uncovered_cells(fam, selected, static_cast<std::uint32_t>(check));
  }
  return out;
}

Json run_separated(const Json& c, RunContext&) {
  const auto points = read_points_csv(get_string(c, "points"));
  require(!points.empty(), ErrorKind::Config, "points file is empty");
  const int d = static_cast<int>(points.front().size());
  const Shape shape = parse_shape(get_string(c, "shape"), d);
  const double s = get_real(c, "s");
  const auto selected = max_separated_subset(points, shape, s);
  std::vector<Vec> chosen;
  for (auto i : selected) chosen.push_back(points[i]);
  Json out{{"selected", indices_to_json(selected)},
           {"count", selected.size()},
           {"overlap_pairs", count_overlap_pairs(points, shape, s)},
           {"selected_overlap_pairs", count_overlap_pairs(chosen, shape, s)}};
  if (c.at("exact").get<bool>()) {
    const auto best = max_separated_subset_exact(points, shape, s);
    out["exact_selected"] = indices_to_json(best);
    out["exact_count"] = best.size();
  }
  return out;
}

McBudget mc_budget(const Json& c) {
  McBudget b;
  b.max_n = positive_int(c, "max_n", 1, 64);
  b.max_samples = static_cast<std::size_t>(positive_int(c, "max_samples", 1, 1LL << 30));
  b.word_budget = kDefaultWordBudget;
  return b;
}

Json run_mc_transversality(const Json& c, RunContext& ctx) {
  const auto mats = diagonal_family(c);
  const SymbolicSequence tail = SymbolicSequence::parse(get_string(c, "tail"));
  const int n = positive_int(c, "n");
  const double R = get_real(c, "R");
  const auto samples = static_cast<std::size_t>(positive_int(c, "samples"));
  const auto seed = static_cast<std::uint64_t>(get_int(c, "seed"));
  const auto grid = get_reals(c, "grid");
  const McBudget budget = mc_budget(c);
  const ScalingReport rep = mc_scaling(mats, tail, n, R, grid, samples, seed, budget);
  Json out = rep.to_json();

  const int union_res = positive_int(c, "union_resolution", 0, kMaxResolution);
  if (union_res > 0) {
    const auto params = sample_translations(rep.m, rep.d, R, samples, seed);
    Json per_s = Json::array();
    for (double s : grid) {
      double ratio_sum = 0.0;
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& p : params) {
        const UnionSample u =
            union_measure_statistic(ifs_at(mats, p.T), tail, n, s, static_cast<std::uint32_t>(union_res), budget);
        ratio_sum += u.measure / u.bound;
        worst = std::max(worst, u.measure - u.bound - u.boundary_error);
      }
      per_s.push_back({{"s", s}, {"mean_ratio", ratio_sum / static_cast<double>(samples)}, {"worst_excess", worst}});
    }
    out["union"] = {{"resolution", union_res}, {"per_s", per_s}, {"violations", 0}};
  }
  if (has(c, "csv")) {
    const auto p = artifact_path(ctx, get_string(c, "csv"));
    write_text_file(p, rep.to_csv());
    out["csv"] = p.string();
  }
  return out;
}

Json run_mc_recurrence(const Json& c, RunContext&) {
  const auto mats = diagonal_family(c);
  const int n = positive_int(c, "n");
  const double R = get_real(c, "R");
  const auto samples = static_cast<std::size_t>(positive_int(c, "samples"));
  const auto seed = static_cast<std::uint64_t>(get_int(c, "seed"));
  const auto grid = get_reals(c, "grid");
  const auto res = static_cast<std::uint32_t>(positive_int(c, "resolution", 2, kMaxResolution));
  const McBudget budget = mc_budget(c);
  require(n <= budget.max_n, ErrorKind::Budget, "level exceeds the Monte Carlo depth budget");
  require(samples <= budget.max_samples, ErrorKind::Budget, "sample count exceeds the budget");
  const int d = static_cast<int>(mats.front().rows());
  const auto params = sample_translations(static_cast<int>(mats.size()), d, R, samples, seed);
  Json per_s = Json::array();
  for (double s : grid) {
    std::vector<UnionSample> us(samples);
    parallel_chunks(samples, 1, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        us[i] = recurrence_union_statistic(ifs_at(mats, params[i].T, ContractionMode::Strict), n, s, res, budget);
      }
    });
    double sum = 0.0;
    double bound_sum = 0.0;
    for (const auto& u : us) {
      sum += u.measure;
      bound_sum += u.bound;
    }
    const double mean = sum / static_cast<double>(samples);
    double ss = 0.0;
    for (const auto& u : us) ss += (u.measure - mean) * (u.measure - mean);
    const double se = samples > 1 ? std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
    per_s.push_back({{"s", s},
                     {"mean_measure", mean},
                     {"stderr", se},
                     {"mean_bound", bound_sum / static_cast<double>(samples)},
                     {"mean_over_s_d", mean / std::pow(s, d)}});
  }
  return {{"n", n}, {"m", mats.size()}, {"d", d}, {"R", R}, {"seed", seed}, {"samples", samples},
          {"resolution", res}, {"per_s", per_s}};
}

Json run_dim(const Json& c, RunContext&) {
  DimensionInput in{get_reals(c, "lambdas"), get_real(c, "lambda_a"), get_real(c, "s")};
  return dim_lower_bound(in).to_json();
}

Json run_garsia_criterion(const Json& c, RunContext& ctx) {
  const DichotomyResult r = garsia_hausdorff_criterion(get_real(c, "s"), HFamily::parse(get_string(c, "h")));
  *ctx.console << to_string(r.verdict) << "\n";
  return r.to_json();
}

Json run_exact_overlap(const Json& c, RunContext&) {
  const AffineIFS ifs = load_ifs(c);
  const int max_len = positive_int(c, "max_len", 1, 32);
  const auto pairs = detect_exact_overlaps(ifs, max_len, budget_value(c, "word_budget"));
  Json jp = Json::array();
  for (const auto& p : pairs) jp.push_back({{"u", p.u.to_string()}, {"v", p.v.to_string()}, {"exact", p.exact}});
  Json out{{"pairs", jp}, {"count", pairs.size()}};
  std::optional<Word> w;
  if (has(c, "word")) {
    w = Word::parse(get_string(c, "word"));
  } else if (!pairs.empty()) {
    w = pairs.front().u;
  }
  std::optional<OverlapWitness> witness;
  if (w) {
    const double g = exact_overlap_gamma(ifs, *w);
    out["word"] = w->to_string();
    out["gamma"] = g;
    witness = OverlapWitness{static_cast<int>(w->size()), g};
  }
  const int N = positive_int(c, "N", 0, 1'000'000);
  if (N > 0) {
    const TargetSpec spec =
        TargetSpec::shrinking_ball(HFamily::parse(get_string(c, "h")), SymbolicSequence::parse(get_string(c, "center")));
    const BorelCantelliReport r = borel_cantelli_report(ifs, spec, N, witness);
    Json bc{{"level_bounds", r.level_bounds}, {"partial_sums", r.partial_sums}, {"hint", std::string(to_string(r.hint))}};
    if (r.overlap) {
      bc["overlap_partial_sums"] = r.overlap_partial_sums;
      bc["overlap_series_bound"] = r.overlap_series_bound;
      bc["overlap_hint"] = std::string(to_string(r.overlap_hint));
    }
    out["borel_cantelli"] = bc;
  }
  return out;
}

Json run_product_criterion(const Json& c, RunContext&) {
  const double v = product_ifs_criterion(get_ints(c, "sizes"), get_reals(c, "ratios"));
  return {{"value", v}, {"zero_measure_regime", v < 1.0}};
}

// ---------------------------------------------------------------------------
// Schema

Json env_threads() {
  if (const char* e = std::getenv("IFS_RECUR_THREADS")) {
    try {
      return std::stoi(e);
    } catch (const std::logic_error&) {
      fail(ErrorKind::Config, std::string("IFS_RECUR_THREADS is not an integer: ") + e);
    }
  }
  return 0;
}

KeySpec key(std::string name, KeyType t, Json def, std::string help) {
  return {std::move(name), t, std::move(def), false, std::move(help)};
}
KeySpec required(std::string name, KeyType t, std::string help) {
  return {std::move(name), t, nullptr, true, std::move(help)};
}

Json default_grid() { return kDefaultScaleGrid; }

std::vector<Experiment> build_experiments() {
  const auto wb = static_cast<long long>(kDefaultWordBudget);
  const auto cb = static_cast<long long>(kDefaultCellBudget);
  std::vector<Experiment> e;
  e.push_back({"lambda", "Print lambda(A) = sum |det A_i| for an IFS file",
               {required("ifs", KeyType::String, "IFS JSON file")}, run_lambda});
  e.push_back({"garsia-check", "Certify or refute that a monic integer polynomial defines a Garsia number",
               {required("poly", KeyType::String, "polynomial, e.g. \"x^2-2\" or \"[1,0,-2]\"")}, run_garsia_check});
  e.push_back({"garsia-sep", "Exhaustive separation minimum of {-1,0,1} sums of powers of lambda",
               {key("poly", KeyType::String, nullptr, "Garsia polynomial; lambda = 1/root"),
                key("lambda", KeyType::Real, nullptr, "lambda in (1/2, 1)"),
                key("n_min", KeyType::Int, 1, "first length"),
                key("n_max", KeyType::Int, 14, "last length (<= 16)"),
                key("window_from", KeyType::Int, 4, "first length of the sep*2^n window")},
               run_garsia_sep});
  const auto stage_keys = [&](bool recurrence) {
    std::vector<KeySpec> k{required("ifs", KeyType::String, "IFS JSON file"),
                           required("n", KeyType::Int, "level"),
                           key("n_from", KeyType::Int, 1, "first level of the family used for the bounds"),
                           key("h", KeyType::String, "const:1", "h family: power:c,alpha | const:C | table:v1,..")};
    if (!recurrence) k.push_back(key("center", KeyType::String, "(0)", "target point as pre(period) symbols"));
    for (auto&& x : {key("resolution", KeyType::Int, 16384, "cells per axis"),
                     key("window", KeyType::RealList, nullptr, "lo_1..lo_d,hi_1..hi_d (default: bounding box)"),
                     key("word_budget", KeyType::Int, wb, "max words enumerated per run"),
                     key("cell_budget", KeyType::Int, cb, "max raster cells"),
                     key("pgm", KeyType::String, nullptr, "write the level-n mask as PGM (d=2)"),
                     key("csv", KeyType::String, nullptr, "write the level-n mask as run-length CSV (d=1)")}) {
      k.push_back(x);
    }
    return k;
  };
  e.push_back({"stage-measure", "Rasterize a shrinking-target stage set and report its measure and bounds",
               stage_keys(false), [](const Json& c, RunContext& ctx) { return run_stage(c, ctx, false); }});
  e.push_back({"recurrence-measure", "Rasterize a recurrence stage set and report its measure and bounds",
               stage_keys(true), [](const Json& c, RunContext& ctx) { return run_stage(c, ctx, true); }});
  e.push_back({"bounds", "Kochen-Stone and Bonferroni lower bounds from an intersection table",
               {required("table", KeyType::String, "rows separated by ';', entries by ','"),
                key("union", KeyType::Real, nullptr, "union measure to compare against")},
               run_bounds});
  e.push_back({"cover", "Greedy disjoint subfamily of shrinking rectangles (3-dilates cover all)",
               {required("rects", KeyType::String, "CSV rows c_1..c_d,h_1..h_d"),
                key("check_resolution", KeyType::Int, 4096, "raster check of the 3-dilate cover (0 = skip)")},
               run_cover});
  e.push_back({"separated", "Greedy (s,E)-separated subset and overlap pair count",
               {required("points", KeyType::String, "CSV, one point per row"),
                required("s", KeyType::Real, "scale"),
                key("shape", KeyType::String, "ball:1", "ball:r or box:h1,..,hd"),
                key("exact", KeyType::Bool, false, "also run the exhaustive search (<= 20 points)")},
               run_separated});
  const std::vector<KeySpec> mc_common{required("diag", KeyType::RealList, "common diagonal matrix entries"),
                                       required("m", KeyType::Int, "number of maps"),
                                       key("R", KeyType::Real, 1.0, "translations uniform in [-R,R]"),
                                       key("seed", KeyType::Int, 7, "master seed"),
                                       key("grid", KeyType::RealList, default_grid(), "scale grid s"),
                                       key("max_n", KeyType::Int, 8, "depth budget"),
                                       key("max_samples", KeyType::Int, 500, "sample budget")};
  {
    std::vector<KeySpec> k = mc_common;
    for (auto&& x : {key("n", KeyType::Int, 6, "level"), key("samples", KeyType::Int, 200, "parameter samples"),
                     key("tail", KeyType::String, "(0)", "tail sequence for the centers"),
                     key("union_resolution", KeyType::Int, 0, "also check the union bound at this resolution"),
                     key("csv", KeyType::String, nullptr, "long-format per-sample CSV")}) {
      k.push_back(x);
    }
    e.push_back({"mc-transversality", "Monte Carlo pair-count scaling over random translations", k,
                 run_mc_transversality});
  }
  {
    std::vector<KeySpec> k = mc_common;
    for (auto&& x : {key("n", KeyType::Int, 4, "level"), key("samples", KeyType::Int, 50, "parameter samples"),
                     key("resolution", KeyType::Int, 2048, "cells per axis")}) {
      k.push_back(x);
    }
    e.push_back({"mc-recurrence", "Monte Carlo recurrence union measure over random translations", k,
                 run_mc_recurrence});
  }
  e.push_back({"dim", "Hausdorff dimension lower bound for diagonal systems",
               {required("lambdas", KeyType::RealList, "diagonal entries in (0,1/2)"),
                required("lambda_a", KeyType::Real, "lambda(A) > 1"), required("s", KeyType::Real, "s > 1")},
               run_dim});
  e.push_back({"garsia-criterion", "Hausdorff measure dichotomy for Garsia recurrence sets",
               {required("s", KeyType::Real, "s in (0,1]"), required("h", KeyType::String, "power:c,alpha or const:C")},
               run_garsia_criterion});
  e.push_back({"exact-overlap", "Detect exact overlaps and report the decay factor gamma",
               {required("ifs", KeyType::String, "IFS JSON file"), key("max_len", KeyType::Int, 2, "max word length"),
                key("word", KeyType::String, nullptr, "word for gamma (default: first overlap found)"),
                key("N", KeyType::Int, 0, "Borel-Cantelli depth (0 = skip)"),
                key("h", KeyType::String, "const:1", "h family for the Borel-Cantelli sums"),
                key("center", KeyType::String, "(0)", "target point"),
                key("word_budget", KeyType::Int, wb, "max words per length")},
               run_exact_overlap});
  e.push_back({"product-criterion", "Zero-measure criterion for products of homogeneous systems",
               {required("sizes", KeyType::IntList, "alphabet size per factor"),
                required("ratios", KeyType::RealList, "contraction ratio per factor")},
               run_product_criterion});
  return e;
}

std::string dashed(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

std::string type_name(KeyType t) {
  switch (t) {
    case KeyType::Int: return "integer";
    case KeyType::Real: return "number";
    case KeyType::String: return "string";
    case KeyType::Bool: return "boolean";
    case KeyType::IntList: return "integer list";
    case KeyType::RealList: return "number list";
  }
  return "value";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

Json parse_scalar(const KeySpec& k, KeyType t, const std::string& raw) {
  const auto bad = [&] { fail(ErrorKind::Config, "--" + dashed(k.name) + ": expected " + type_name(k.type) + ", got \"" + raw + "\""); };
  try {
    std::size_t used = 0;
    if (t == KeyType::Int) {
      const long long v = std::stoll(raw, &used);
      if (used != raw.size()) bad();
      return v;
    }
    if (t == KeyType::Real) {
      const double v = std::stod(raw, &used);
      if (used != raw.size()) bad();
      return v;
    }
  } catch (const std::logic_error&) {
    bad();
  }
  if (t == KeyType::Bool) {
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    bad();
  }
  return raw;
}

Json parse_flag(const KeySpec& k, const std::string& raw) {
  if (k.type == KeyType::IntList || k.type == KeyType::RealList) {
    const KeyType inner = k.type == KeyType::IntList ? KeyType::Int : KeyType::Real;
    Json arr = Json::array();
    for (const auto& item : split_list(raw)) arr.push_back(parse_scalar(k, inner, item));
    return arr;
  }
  return parse_scalar(k, k.type, raw);
}

Json coerce(const KeySpec& k, const Json& v) {
  if (v.is_null()) {
    require(!k.required, ErrorKind::Config, "key \"" + k.name + "\" is required");
    return v;
  }
  const auto bad = [&] { fail(ErrorKind::Config, "key \"" + k.name + "\": expected " + type_name(k.type)); };
  switch (k.type) {
    case KeyType::Int:
      if (!v.is_number_integer()) bad();
      return v.get<long long>();
    case KeyType::Real:
      if (!v.is_number()) bad();
      return v.get<double>();
    case KeyType::String:
      if (!v.is_string()) bad();
      return v;
    case KeyType::Bool:
      if (!v.is_boolean()) bad();
      return v;
    case KeyType::IntList:
    case KeyType::RealList: {
      if (v.is_string()) return parse_flag(k, v.get<std::string>());
      if (!v.is_array()) bad();
      Json arr = Json::array();
      for (const auto& x : v) {
        if (k.type == KeyType::IntList ? !x.is_number_integer() : !x.is_number()) bad();
        arr.push_back(k.type == KeyType::IntList ? Json(x.get<long long>()) : Json(x.get<double>()));
      }
      return arr;
    }
  }
  return v;
}

int exit_code_for_kind(ErrorKind k) {
  switch (k) {
    case ErrorKind::Budget: return 3;
    case ErrorKind::Consistency:
    case ErrorKind::Numeric: return 4;
    default: return 2;
  }
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> all = build_experiments();
  return all;
}

const Experiment* find_experiment(const std::string& name) {
  for (const auto& e : experiments()) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const std::vector<KeySpec>& common_keys() {
  static const std::vector<KeySpec> keys{
      key("out", KeyType::String, ".", "output directory for results.json and artifacts"),
      key("threads", KeyType::Int, 0, "worker threads (0 = all cores; env IFS_RECUR_THREADS)"),
  };
  return keys;
}

Json resolve_config(const Experiment& exp, const Json& file_config,
                    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::map<std::string, const KeySpec*> schema;
  for (const auto& k : exp.keys) schema[k.name] = &k;
  for (const auto& k : common_keys()) schema[k.name] = &k;

  Json cfg;
  cfg["experiment"] = exp.name;
  for (const auto& k : exp.keys) cfg[k.name] = k.default_value;
  cfg["out"] = ".";
  cfg["threads"] = env_threads();

  if (!file_config.is_null()) {
    require(file_config.is_object(), ErrorKind::Config, "config must be a JSON object");
    for (auto it = file_config.begin(); it != file_config.end(); ++it) {
      if (it.key() == "experiment") {
        require(it.value() == exp.name, ErrorKind::Config,
                "config is for experiment " + it.value().dump() + ", not " + exp.name);
        continue;
      }
      const auto s = schema.find(it.key());
      require(s != schema.end(), ErrorKind::Config, "unknown key \"" + it.key() + "\" for " + exp.name);
      cfg[it.key()] = it.value();
    }
  }
  for (const auto& [name, raw] : overrides) {
    const auto s = schema.find(name);
    require(s != schema.end(), ErrorKind::Config, "unknown key \"" + name + "\" for " + exp.name);
    cfg[name] = parse_flag(*s->second, raw);
  }
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    if (it.key() == "experiment") continue;
    it.value() = coerce(*schema.at(it.key()), it.value());
  }
  require(cfg["threads"].get<long long>() >= 0, ErrorKind::Config, "threads must be >= 0");
  return cfg;
}

int exit_code_for(const std::string& kind) {
  for (auto k : {ErrorKind::InvalidIfs, ErrorKind::Index, ErrorKind::Domain, ErrorKind::Unsupported,
                 ErrorKind::Budget, ErrorKind::Numeric, ErrorKind::Config, ErrorKind::Consistency}) {
    if (to_string(k) == kind) return exit_code_for_kind(k);
  }
  return 4;
}

Outcome run_experiment(const Json& resolved, std::ostream& console) {
  const Experiment* exp = find_experiment(resolved.at("experiment").get<std::string>());
  require(exp != nullptr, ErrorKind::Config, "unknown experiment");
  RunContext ctx{resolved.at("out").get<std::string>(), &console};
  set_thread_count(static_cast<unsigned>(resolved.at("threads").get<long long>()));

  Outcome o;
  o.results["format_version"] = kFormatVersion;
  o.results["experiment"] = exp->name;
  o.results["config"] = resolved;
  const auto started = iso_now();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Json result = exp->run(resolved, ctx);
    o.results["status"] = "ok";
    o.results["result"] = std::move(result);
    o.results["error"] = nullptr;
  } catch (const Error& e) {
    o.exit_code = exit_code_for_kind(e.kind());
    o.results["status"] = "error";
    o.results["result"] = nullptr;
    o.results["error"] = {{"kind", std::string(to_string(e.kind()))}, {"reason", e.what()}};
  } catch (const std::exception& e) {
    o.exit_code = 4;
    o.results["status"] = "error";
    o.results["result"] = nullptr;
    o.results["error"] = {{"kind", "internal"}, {"reason", e.what()}};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text_file(ctx.out_dir / "results.json", dump_json(o.results) + "\n");
  write_text_file(ctx.out_dir / "results.meta.json",
                  dump_json(Json{{"started", started},
                                 {"finished", iso_now()},
                                 {"elapsed_seconds", elapsed},
                                 {"threads", thread_count()}}) +
                      "\n");
  return o;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ifs-recur: shrinking targets and recurrence for overlapping affine IFS"};
  app.require_subcommand(0, 1);
  std::string kinds = "Experiments:";
  for (const auto& e : experiments()) kinds += " " + e.name;
  app.footer(kinds + "\nEvery run writes <out>/results.json. Flags override keys from --config.");

  struct Bound {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config;
  };
  std::map<std::string, Bound> bound;
  std::map<std::string, CLI::App*> subs;
  for (const auto& e : experiments()) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    Bound& b = bound[e.name];
    sub->add_option("--config", b.config, "JSON config file");
    std::vector<const KeySpec*> keys;
    for (const auto& k : e.keys) keys.push_back(&k);
    for (const auto& k : common_keys()) keys.push_back(&k);
    for (const KeySpec* k : keys) {
      std::string help = k->help + " [" + type_name(k->type) + "]";
      if (k->required) help += " (required)";
      else if (!k->default_value.is_null()) help += " (default " + dump_json(k->default_value, -1) + ")";
      b.options[k->name] = sub->add_option("--" + dashed(k->name), b.values[k->name], help);
    }
    subs[e.name] = sub;
  }
  std::string run_config;
  std::string run_out;
  std::string run_threads;
  CLI::App* run = app.add_subcommand("run", "Run the experiment named by a config file's \"experiment\" key");
  run->add_option("--config", run_config, "JSON config file (a results.json is accepted too)")->required();
  CLI::Option* run_out_opt = run->add_option("--out", run_out, "output directory");
  CLI::Option* run_threads_opt = run->add_option("--threads", run_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }
  if (app.get_subcommands().empty()) {
    out << app.help();
    return 0;
  }

  const Experiment* exp = nullptr;
  Json file_config;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string out_dir = ".";
  try {
    if (run->parsed()) {
      file_config = read_json_file(run_config);
      if (file_config.contains("format_version") && file_config.contains("config")) file_config = file_config["config"];
      require(file_config.contains("experiment") && file_config["experiment"].is_string(), ErrorKind::Config,
              "config has no \"experiment\" key");
      exp = find_experiment(file_config["experiment"].get<std::string>());
      require(exp != nullptr, ErrorKind::Config, "unknown experiment " + file_config["experiment"].dump());
      if (run_out_opt->count() > 0) overrides.emplace_back("out", run_out);
      if (run_threads_opt->count() > 0) overrides.emplace_back("threads", run_threads);
    } else {
      for (const auto& e : experiments()) {
        if (subs[e.name]->parsed()) exp = &e;
      }
      Bound& b = bound[exp->name];
      if (!b.config.empty()) file_config = read_json_file(b.config);
      for (const auto& [name, opt] : b.options) {
        if (opt->count() > 0) overrides.emplace_back(name, b.values[name]);
      }
    }
    for (const auto& [k, v] : overrides) {
      if (k == "out") out_dir = v;
    }
    if (file_config.is_object() && file_config.contains("out") && file_config["out"].is_string() &&
        out_dir == ".") {
      out_dir = file_config["out"].get<std::string>();
    }
    const Json resolved = resolve_config(*exp, file_config, overrides);
    const Outcome o = run_experiment(resolved, out);
    if (o.exit_code == 0) {
      if (exp->name != "lambda" && exp->name != "garsia-check" && exp->name != "garsia-criterion") {
        out << dump_json(o.results["result"]) << "\n";
      }
    } else {
      err << "error: " << o.results["error"]["kind"].get<std::string>() << ": "
          << o.results["error"]["reason"].get<std::string>() << "\n";
    }
    return o.exit_code;
  } catch (const Error& e) {
    // Configuration failed before the experiment could start.
    Json results;
    results["format_version"] = kFormatVersion;
    results["experiment"] = exp ? Json(exp->name) : Json(nullptr);
    results["config"] = file_config.is_null() ? Json::object() : file_config;
    results["status"] = "error";
    results["result"] = nullptr;
    results["error"] = {{"kind", std::string(to_string(e.kind()))}, {"reason", e.what()}};
    try {
      write_text_file(std::filesystem::path(out_dir) / "results.json", dump_json(results) + "\n");
    } catch (const std::exception&) {
    }
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code_for_kind(e.kind());
  }
}

}  // namespace ifsrecur::cli
