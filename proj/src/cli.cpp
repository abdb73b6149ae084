#include "rzl/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rzl/error.hpp"
#include "rzl/format.hpp"
#include "rzl/kacrice.hpp"
#include "rzl/limits.hpp"
#include "rzl/montecarlo.hpp"
#include "rzl/szego.hpp"

namespace rzl::cli {

namespace {

using json = nlohmann::ordered_json;
using geometry::RadialProfile;

constexpr int kExitPrecondition = 2;
constexpr int kExitAccuracy = 3;
constexpr int kExitGate = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::conditioning:
    case ErrorKind::accuracy:
      return kExitAccuracy;
    default:
      return kExitPrecondition;
  }
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

[[noreturn]] void bad_input(const std::string& what) { throw Error(ErrorKind::precondition, what); }

double parse_real(std::string_view s, std::string_view whole) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    bad_input("cannot parse complex number '" + std::string(whole) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t k = 0; k <= text.size(); ++k)
    if (k == text.size() || text[k] == sep) {
      parts.push_back(text.substr(start, k - start));
      start = k + 1;
    }
  return parts;
}

struct Sinks {
  std::ostream& out;
  std::ostream& err;
  std::string out_path;
  std::string summary_path;

  void write(const std::string& path, std::ostream& fallback, const std::string& text) const {
    if (path.empty() || path == "-") {
      fallback << text;
      fallback.flush();
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) bad_input("cannot open '" + path + "' for writing");
    f << text;
    if (!f) bad_input("failed writing '" + path + "'");
  }
};

struct Report {
  json config = json::object();
  json metrics = json::object();
  json gates = json::object();
  std::vector<std::string> failed;

  void gate(const std::string& name, bool pass) {
    gates[name] = pass ? "pass" : "fail";
    if (!pass) failed.push_back(name);
  }
};

int finish(const Sinks& sinks, const std::string& sub, const std::string& csv, const Report& r) {
  const json summary = {{"subcommand", sub}, {"config", r.config}, {"metrics", r.metrics}, {"gates", r.gates}};
  sinks.write(sinks.out_path, sinks.out, csv);
  sinks.write(sinks.summary_path, sinks.err, summary.dump(2) + "\n");
  if (r.failed.empty()) return 0;
  std::string names;
  for (const auto& n : r.failed) names += (names.empty() ? "" : ",") + n;
  sinks.err << "ERROR " << kExitGate << " gate failed: " << names << '\n';
  return kExitGate;
}

std::vector<double> lambda_grid(double lo, double hi, int steps) {
  if (steps < 1) bad_input("--steps must be at least 1");
  if (!(lo < hi)) bad_input("--lambda-min must be below --lambda-max");
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) grid[std::size_t(k)] = lo + (hi - lo) * k / steps;
  return grid;
}

int sign_changes(const std::vector<double>& v) {
  int changes = 0, prev = 0;
  for (double x : v) {
    const int s = (x > 0) - (x < 0);
    if (s != 0 && prev != 0 && s != prev) ++changes;
    if (s != 0) prev = s;
  }
  return changes;
}

json complex_json(const CVec& v) {
  json a = json::array();
  for (auto c : v) a.push_back({c.real(), c.imag()});
  return a;
}

struct Site {
  RadialProfile profile;
  geometry::BoundaryPoint z;
  geometry::GeometryJet jet;
};

Site make_site(const std::string& profile_spec, const std::string& z_text) {
  auto profile = RadialProfile::parse(profile_spec);
  auto z = parse_complex_vector(z_text);
  if (int(z.size()) != profile.m() + 1)
    bad_input("--z needs " + std::to_string(profile.m() + 1) + " components for profile '" + profile_spec + "'");
  auto bz = geometry::on_boundary(profile, std::move(z));
  geometry::admit(profile, bz);
  auto jet = geometry::geometry_jet(profile, bz);
  return {std::move(profile), std::move(bz), std::move(jet)};
}

CVec direction(const std::string& text, const Site& s, bool required) {
  if (text.empty()) {
    if (required) bad_input("--u is required");
    return CVec(std::size_t(s.profile.m() + 1), 0.0);
  }
  auto u = parse_complex_vector(text);
  if (int(u.size()) != s.profile.m() + 1)
    bad_input("--u needs " + std::to_string(s.profile.m() + 1) + " components");
  return u;
}

struct GridOptions {
  double lambda_min = 0.1;
  double lambda_max = 50.0;
  int steps = 500;
};

struct FiguresOptions : GridOptions {};

int run_figures(const FiguresOptions& o, const Sinks& sinks) {
  const auto grid = lambda_grid(o.lambda_min, o.lambda_max, o.steps);
  if (!(o.lambda_min > 0.0)) bad_input("--lambda-min must be positive (lambda = 0 is degenerate)");
  const auto sphere = RadialProfile::sphere(1);
  const auto geom = geometry::limit_geometry(geometry::geometry_jet(sphere, geometry::on_boundary(sphere, {1.0, 0.0})));

  std::string csv = "lambda,k_perp,k_theta\n";
  std::vector<double> kp, kt_minus_one;
  for (double l : grid) {
    const double a = limits::pair_limit(1, geom, l).K_tilde_inf;
    const double b = limits::pair_limit(1, geom, cplx(0.0, l)).K_tilde_inf;
    kp.push_back(a);
    kt_minus_one.push_back(b - 1.0);
    csv += fmt17(l) + ',' + fmt17(a) + ',' + fmt17(b) + '\n';
  }

  Report r;
  r.config = {{"profile", "sphere"}, {"z", complex_json({1.0, 0.0})}, {"lambda_min", o.lambda_min},
              {"lambda_max", o.lambda_max}, {"steps", o.steps}};
  const int changes = sign_changes(kt_minus_one);
  r.metrics = {{"k_perp_first", kp.front()}, {"k_perp_last", kp.back()},
               {"k_theta_sign_changes", changes}};
  r.gate("k_perp_dip_below_1", kp.front() < 1.0);
  r.gate("k_perp_tail_within_0.05", std::abs(kp.back() - 1.0) < 0.05);
  r.gate("k_theta_oscillates", changes >= 3);
  return finish(sinks, "figures", csv, r);
}

struct CurveOptions : GridOptions {
  std::string profile = "sphere";
  std::string z, u;
};

int run_limits_curve(const CurveOptions& o, const Sinks& sinks) {
  const auto grid = lambda_grid(o.lambda_min, o.lambda_max, o.steps);
  const auto site = make_site(o.profile, o.z);
  const auto dir = direction(o.u, site, true);
  const cplx b1 = geometry::beta(site.jet, dir);
  if (std::abs(b1) < kTolBeta) bad_input("--u is tangential: beta(u) vanishes");
  const auto geom = geometry::limit_geometry(site.jet);
  const int m = site.profile.m();

  std::string csv = "lambda,re_beta,im_beta,D_inf,K_inf,K_tilde_inf\n";
  for (double l : grid) {
    const cplx b = l * b1;
    const double d = limits::density_limit(m, geom, b);
    double K = std::nan(""), Kt = std::nan("");
    if (std::abs(b) >= kTolBeta) {
      const auto p = limits::pair_limit(m, geom, b);
      K = p.K_inf;
      Kt = p.K_tilde_inf;
    }
    csv += fmt17(l) + ',' + fmt17(b.real()) + ',' + fmt17(b.imag()) + ',' + fmt17(d) + ',' + fmt17(K) + ',' +
           fmt17(Kt) + '\n';
  }
  Report r;
  r.config = {{"profile", o.profile}, {"z", complex_json(site.z.z)}, {"u", complex_json(dir)},
              {"lambda_min", o.lambda_min}, {"lambda_max", o.lambda_max}, {"steps", o.steps}};
  r.metrics = {{"t0", geom.t0.real()}, {"P_norm_sq", geom.P_norm_sq},
               {"beta_u", {b1.real(), b1.imag()}}, {"D_inf_at_0", limits::density_limit(m, geom, 0.0)}};
  return finish(sinks, "limits-curve", csv, r);
}

struct ConvergeOptions {
  std::string profile = "circle";
  std::string z, u, N_list;
  int quad_order = szego::kDefaultQuadOrder;
};

int run_converge(const ConvergeOptions& o, kacrice::Study study, const Sinks& sinks) {
  const bool pair = study == kacrice::Study::pair;
  const auto site = make_site(o.profile, o.z);
  const auto u = direction(o.u, site, pair);
  const auto Ns = parse_int_list(o.N_list);
  if (Ns.size() < 3) bad_input("--N-list needs at least 3 entries");
  for (std::size_t k = 0; k < Ns.size(); ++k)
    if (Ns[k] <= 0 || (k && Ns[k] <= Ns[k - 1])) bad_input("--N-list must be positive and strictly ascending");
  if (pair && std::abs(geometry::beta(site.jet, u)) < kTolBeta) bad_input("--u is tangential: beta(u) vanishes");
  if (o.quad_order < 2) bad_input("--quad-order must be at least 2");

  const auto table = szego::compute_norms(site.profile, Ns.back(), o.quad_order);
  const auto t = kacrice::convergence_table(table, site.jet, site.z.z, u, Ns, study);

  std::string csv = pair ? "N,D_scaled,K_scaled,K_tilde,err_D,err_K,flagged\n" : "N,D_scaled,err_D,flagged\n";
  for (const auto& row : t.rows) {
    const bool flag = row.err_D > 0.1 || (pair && !(row.err_K <= 0.1));
    csv += std::to_string(row.N) + ',' + fmt17(row.D_scaled) + ',';
    if (pair) csv += fmt17(row.K_scaled) + ',' + fmt17(row.K_tilde) + ',';
    csv += fmt17(row.err_D) + ',';
    if (pair) csv += fmt17(row.err_K) + ',';
    csv += flag ? "1\n" : "0\n";
  }

  Report r;
  r.config = {{"profile", o.profile}, {"z", complex_json(site.z.z)}, {"u", complex_json(u)},
              {"N_list", Ns}, {"quad_order", o.quad_order}};
  r.metrics["D_limit"] = t.D_limit;
  r.metrics["rate_D"] = t.rate_D;
  r.metrics["err_D_last"] = t.rows.back().err_D;
  if (pair) {
    r.metrics["K_limit"] = t.K_limit;
    r.metrics["K_tilde_limit"] = t.K_tilde_limit;
    r.metrics["rate_K"] = t.rate_K;
    r.metrics["err_K_last"] = t.rows.back().err_K;
  }
  r.metrics["measure"] = table.measure_tag();
  r.gate("last_error_within_10pct", !t.flagged);
  return finish(sinks, pair ? "converge-pair" : "converge-density", csv, r);
}

struct McOptions {
  int N = 100;
  int trials = 10000;
  std::uint64_t seed = 1;
  std::string z = "1+0i";
  int bins = 9;
  double window = 4.5;
};

int run_mc_circle(const McOptions& o, const Sinks& sinks) {
  const auto zv = parse_complex_vector(o.z);
  if (zv.size() != 1) bad_input("--z needs 1 component for the circle");
  montecarlo::EnsembleConfig cfg;
  cfg.N = o.N;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.bins_re = cfg.bins_im = o.bins;
  cfg.window = {-o.window, o.window, -o.window, o.window};
  montecarlo::validate(cfg);
  const auto table = szego::compute_norms(RadialProfile::circle(), o.N);
  const auto h = montecarlo::estimate_density(cfg, table, zv[0]);

  std::ostringstream csv;
  montecarlo::write_histogram_csv(csv, h);

  Report r;
  r.config = {{"profile", "circle"}, {"z", complex_json(zv)}, {"N", o.N}, {"trials", o.trials},
              {"seed", o.seed}, {"bins", o.bins}, {"window", o.window}};
  const int c = h.central_bin();
  const auto& mid = h.bins[std::size_t(c < 0 ? 0 : c)];
  const double within = h.fraction_within(3.0);
  r.metrics = {{"trials_used", h.trials_used},
               {"trials_discarded", h.trials_discarded},
               {"mean_roots_per_trial", h.mean_roots_per_trial()},
               {"roots_in_window", h.in_window},
               {"central_empirical", mid.empirical},
               {"central_predicted", mid.predicted},
               {"central_z_score", mid.z_score},
               {"fraction_abs_z_below_3", within}};
  r.gate("central_bin_within_3se", c >= 0 && std::abs(mid.z_score) < 3.0);
  r.gate("bins_within_3se_at_least_90pct", within >= 0.9);
  return finish(sinks, "mc-circle", csv.str(), r);
}

struct NormsOptions {
  std::string profile = "circle";
  int N = -1;
  int quad_order = szego::kDefaultQuadOrder;
};

int run_norms(const NormsOptions& o, const Sinks& sinks) {
  if (o.N < 0) bad_input("--N must be non-negative");
  if (o.quad_order < 2) bad_input("--quad-order must be at least 2");
  const auto profile = RadialProfile::parse(o.profile);
  const auto table = szego::compute_norms(profile, o.N, o.quad_order);
  std::ostringstream text;
  szego::write_table(text, table);
  Report r;
  r.config = {{"profile", o.profile}, {"N", o.N}, {"quad_order", o.quad_order}};
  r.metrics = {{"m", table.m()}, {"indices", table.indices().size()}, {"total_mass", table.total_mass()},
               {"measure", table.measure_tag()}};
  return finish(sinks, "norms", text.str(), r);
}

const char* kComplexHelp =
    "Complex numbers are written a+bi or a-bi without spaces (also a or bi); "
    "vectors are comma-separated, e.g. --z 0.70710678118654757+0i,0+0.70710678118654757i.";

}  // namespace

cplx parse_complex(std::string_view text) {
  if (text.empty()) bad_input("empty complex number");
  if (text.back() != 'i') return parse_real(text, text);
  const auto body = text.substr(0, text.size() - 1);
  std::size_t split_at = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;)
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split_at = k;
      break;
    }
  const auto imag_part = [&](std::string_view s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s, text);
  };
  if (split_at == std::string_view::npos) return {0.0, imag_part(body)};
  return {parse_real(body.substr(0, split_at), text), imag_part(body.substr(split_at))};
}

CVec parse_complex_vector(std::string_view text) {
  CVec out;
  for (auto part : split(text, ',')) out.push_back(parse_complex(part));
  return out;
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (auto part : split(text, ',')) {
    int v = 0;
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || res.ec != std::errc() || res.ptr != part.data() + part.size())
      bad_input("cannot parse integer list '" + std::string(text) + "'");
    out.push_back(v);
  }
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Near-boundary zero statistics: limit formulas, finite-N kernels, Monte Carlo", "rzl"};
  app.require_subcommand(1);
  app.footer(kComplexHelp);
  std::string out_path, summary_path;
  const auto add_sinks = [&](CLI::App* sub) {
    sub->add_option("--out", out_path, "CSV output path (default: stdout)");
    sub->add_option("--summary", summary_path, "JSON summary path (default: stderr)");
  };
  const auto add_grid = [](CLI::App* sub, GridOptions& g) {
    sub->add_option("--lambda-min", g.lambda_min, "Smallest lambda")->capture_default_str();
    sub->add_option("--lambda-max", g.lambda_max, "Largest lambda")->capture_default_str();
    sub->add_option("--steps", g.steps, "Grid intervals")->capture_default_str();
  };

  FiguresOptions fig;
  auto* fig_cmd = app.add_subcommand("figures", "Normalized pair correlation along the normal and angular directions of S^3");
  add_grid(fig_cmd, fig);
  add_sinks(fig_cmd);

  CurveOptions curve;
  auto* curve_cmd = app.add_subcommand("limits-curve", "Limit density and pair correlation along lambda * u");
  curve_cmd->add_option("--profile", curve.profile, "circle, sphere[:m], ellipsoid:a0,..., pellipsoid:p0,...")->capture_default_str();
  curve_cmd->add_option("--z", curve.z, "Boundary point")->required();
  curve_cmd->add_option("--u", curve.u, "Direction")->required();
  add_grid(curve_cmd, curve);
  add_sinks(curve_cmd);

  ConvergeOptions cd, cp;
  const auto add_converge = [&](CLI::App* sub, ConvergeOptions& c, bool pair) {
    sub->add_option("--profile", c.profile, "circle, sphere[:m], ellipsoid:a0,..., pellipsoid:p0,...")->capture_default_str();
    sub->add_option("--z", c.z, "Boundary point")->required();
    auto* u = sub->add_option("--u", c.u, pair ? "Direction" : "Direction (default 0)");
    if (pair) u->required();
    sub->add_option("--N-list", c.N_list, "Ascending degrees, e.g. 50,100,200")->required();
    sub->add_option("--quad-order", c.quad_order, "Initial quadrature order for norms")->capture_default_str();
    add_sinks(sub);
  };
  auto* cd_cmd = app.add_subcommand("converge-density", "Finite-N zero density against its scaling limit");
  add_converge(cd_cmd, cd, false);
  auto* cp_cmd = app.add_subcommand("converge-pair", "Finite-N pair correlation against its scaling limit");
  add_converge(cp_cmd, cp, true);

  McOptions mc;
  auto* mc_cmd = app.add_subcommand("mc-circle", "Monte Carlo zero histogram near a point of the unit circle");
  mc_cmd->add_option("--N", mc.N, "Degree")->capture_default_str();
  mc_cmd->add_option("--trials", mc.trials, "Number of random polynomials")->capture_default_str();
  mc_cmd->add_option("--seed", mc.seed, "Master seed")->capture_default_str();
  mc_cmd->add_option("--z", mc.z, "Point on the unit circle")->capture_default_str();
  mc_cmd->add_option("--bins", mc.bins, "Bins per axis")->capture_default_str();
  mc_cmd->add_option("--window", mc.window, "Half-width of the window in u = N (zeta - z)")->capture_default_str();
  add_sinks(mc_cmd);

  NormsOptions nm;
  auto* nm_cmd = app.add_subcommand("norms", "Write the monomial norm table");
  nm_cmd->add_option("--profile", nm.profile, "circle, sphere[:m], ellipsoid:a0,..., pellipsoid:p0,...")->capture_default_str();
  nm_cmd->add_option("--N", nm.N, "Degree")->required();
  nm_cmd->add_option("--quad-order", nm.quad_order, "Initial quadrature order")->capture_default_str();
  add_sinks(nm_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    err << "ERROR " << kExitPrecondition << " usage: " << one_line(e.what()) << '\n';
    return kExitPrecondition;
  }

  const Sinks sinks{out, err, out_path, summary_path};
  try {
    if (*fig_cmd) return run_figures(fig, sinks);
    if (*curve_cmd) return run_limits_curve(curve, sinks);
    if (*cd_cmd) return run_converge(cd, kacrice::Study::density, sinks);
    if (*cp_cmd) return run_converge(cp, kacrice::Study::pair, sinks);
    if (*mc_cmd) return run_mc_circle(mc, sinks);
    return run_norms(nm, sinks);
  } catch (const Error& e) {
    err << "ERROR " << exit_code(e.kind()) << ' ' << to_string(e.kind()) << ": " << one_line(e.what()) << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "ERROR " << kExitAccuracy << " internal: " << one_line(e.what()) << '\n';
    return kExitAccuracy;
  }
}

}  // namespace rzl::cli
