#include "fracfield/suites.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "fracfield/energy.hpp"

namespace fracfield {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + t + "'");
  }
  if (used != t.size()) throw ConfigError(where + ": expected a number, got '" + t + "'");
  return v;
}

}  // namespace

SuiteConfig SuiteConfig::parse(const std::string& text, const std::string& origin) {
  SuiteConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (body.front() == '[') throw ConfigError(where + ": tables are not supported (flat key = value only)");
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": empty key or value");
    if (cfg.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  if (cfg.has("suite")) cfg.suite = cfg.text("suite");
  return cfg;
}

SuiteConfig SuiteConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

bool SuiteConfig::has(const std::string& key) const { return values_.count(key) > 0; }

void SuiteConfig::set(const std::string& key, const std::string& raw) { values_[key] = raw; }

const std::string& SuiteConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError(origin_ + ": missing key '" + key + "'" + (suite.empty() ? "" : " required by suite " + suite));
  return it->second;
}

double SuiteConfig::number(const std::string& key) const { return parse_number(raw(key), origin_ + ": key " + key); }

int SuiteConfig::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v)) throw ConfigError(origin_ + ": key " + key + " must be an integer");
  return static_cast<int>(v);
}

std::string SuiteConfig::text(const std::string& key) const {
  const std::string& r = raw(key);
  if (r.size() >= 2 && r.front() == '"' && r.back() == '"') return r.substr(1, r.size() - 2);
  return r;
}

std::vector<double> SuiteConfig::numbers(const std::string& key) const {
  const std::string& r = raw(key);
  const std::string where = origin_ + ": key " + key;
  if (r.front() != '[') return {parse_number(r, where)};
  if (r.back() != ']') throw ConfigError(where + ": unterminated array");
  std::vector<double> out;
  std::stringstream ss(r.substr(1, r.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number(item, where));
  }
  if (out.empty()) throw ConfigError(where + ": empty array");
  return out;
}

std::vector<double> SuiteConfig::ladder(const std::string& key) const {
  std::vector<double> v = numbers(key);
  if (coarse && v.size() > 3) {
    const std::size_t keep = std::max<std::size_t>(3, (2 * v.size() + 2) / 3);
    v.resize(keep);
  }
  return v;
}

double SuiteConfig::tolerance(const std::string& key) const { return number(key) * (coarse ? 3.0 : 1.0); }

int VerdictReport::failed() const {
  return static_cast<int>(std::count_if(criteria.begin(), criteria.end(), [](const Criterion& c) { return !c.pass; }));
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace {

QuadratureSpec quadrature(const SuiteConfig& cfg, const std::string& prefix = "") {
  QuadratureSpec q;
  q.rel_tol = cfg.tolerance(prefix + "rel_tol");
  q.abs_tol = cfg.tolerance(prefix + "abs_tol");
  q.max_subdivisions = cfg.integer("max_subdivisions");
  q.validate();
  return q;
}

std::shared_ptr<const Profile> load_profile(const SuiteConfig& cfg, double s) {
  ProfileGrid grid{cfg.number("profile_Z"), cfg.number("profile_h")};
  return std::make_shared<const Profile>(
      cached_profile(FracOrder(s), PotentialSpec::quartic(), grid, cfg.number("profile_tol")));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string s_tag(double s) { return "s=" + fmt(s); }

struct Context {
  const SuiteConfig& cfg;
  VerdictReport& rep;

  void row(const std::string& q, double s, double param, double eps, double value) {
    rep.rows.push_back({q, s, param, eps, value});
  }
  void fit(const std::string& name, const SweepResult& r) { rep.fits.push_back({name, r}); }

  // Evaluates one criterion; module errors are re-raised tagged with its id.
  void check(const std::string& id, const std::function<Criterion()>& body) {
    Criterion c;
    try {
      c = body();
    } catch (const SuiteFailure&) {
      throw;
    } catch (const Error& e) {
      throw SuiteFailure(id, e.what());
    }
    c.id = id;
    rep.criteria.push_back(c);
  }
};

Criterion upper_bound(const std::string& what, double measured, double bound, const std::string& note = "") {
  Criterion c;
  c.description = what;
  c.measured = measured;
  c.expected = 0.0;
  c.tolerance = bound;
  c.pass = std::isfinite(measured) && measured <= bound;
  c.note = note;
  return c;
}

Criterion near_value(const std::string& what, double measured, double expected, double tol, bool relative,
                     const std::string& note = "") {
  Criterion c;
  c.description = what;
  c.measured = measured;
  c.expected = expected;
  c.tolerance = tol;
  const double dev = relative ? std::fabs(measured - expected) / std::fabs(expected) : std::fabs(measured - expected);
  c.pass = std::isfinite(measured) && dev <= tol;
  c.note = note;
  return c;
}

SweepResult fit_or_keep(const std::vector<double>& x, const std::vector<double>& y, FitModel m,
                        std::optional<double> rate = std::nullopt) {
  try {
    return extrapolate(x, y, m, rate);
  } catch (const PoorFit& f) {
    return f.result;
  }
}

double closed_gamma(int d, double s) {
  return s * std::pow(4.0, s) * std::tgamma(0.5 * d + s) / (std::pow(M_PI, 0.5 * d) * std::tgamma(1.0 - s));
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

void suite_constants(Context& cx) {
  const auto& cfg = cx.cfg;
  const double gtol = cfg.number("gamma_tolerance");
  const double stol = cfg.number("sigma_tolerance");
  cx.check("AC-1.gamma-half", [&] {
    const double e1 = std::fabs(gamma_ds(1, FracOrder(1, 2)) - 1.0 / M_PI);
    const double e2 = std::fabs(gamma_ds(2, FracOrder(1, 2)) - 1.0 / (2.0 * M_PI));
    cx.row("gamma_1_half_error", 0.5, 1, 0, e1);
    cx.row("gamma_2_half_error", 0.5, 2, 0, e2);
    return upper_bound("gamma_{1,1/2} = 1/pi and gamma_{2,1/2} = 1/(2 pi)", std::max(e1, e2), gtol);
  });
  cx.check("AC-1.sigma-w", [&] {
    const double v = sigma_w(PotentialSpec::quartic());
    cx.row("sigma_w", 0, 0, 0, v);
    return near_value("sigma_W(quartic) = 4 sqrt(2) / 3", v, 4.0 * std::sqrt(2.0) / 3.0, stol, false);
  });
  cx.check("AC-1.table", [&] {
    double worst = 0.0;
    for (double d : cfg.numbers("table_d")) {
      for (double s : cfg.numbers("table_s")) {
        const double v = gamma_ds(static_cast<int>(d), FracOrder(s));
        const double ref = closed_gamma(static_cast<int>(d), s);
        cx.row("gamma_ds", s, d, 0, v);
        worst = std::max(worst, std::fabs(v - ref) / ref);
      }
    }
    return upper_bound("gamma_{d,s} table against the closed form (relative)", worst, gtol);
  });
}

void suite_halfspace(Context& cx) {
  const auto& cfg = cx.cfg;
  const QuadratureSpec q = quadrature(cfg);
  cx.check("AC-2", [&] {
    double worst = 0.0;
    for (double s : cfg.numbers("s_values")) {
      const FracOrder fs(s);
      const double c = gamma_ds(1, fs) / s;
      for (double d : cfg.numbers("distances")) {
        for (double sg : {1.0, -1.0}) {
          const double exact = sg * c * std::pow(std::fabs(d), -2.0 * s);
          const double brute = halfplane_indicator_bruteforce(fs, sg * d, q);
          const double line = fraclap_indicator(SetDescriptor::halfspace({1.0}), fs, {sg * d}, q);
          cx.row("halfplane_bruteforce", s, sg * d, 0, brute);
          cx.row("halfline_closed_form", s, sg * d, 0, line);
          worst = std::max({worst, std::fabs(brute - exact) / std::fabs(exact), std::fabs(line - exact) / std::fabs(exact)});
        }
      }
    }
    return upper_bound("half-space indicator against (gamma_{1,s}/s) sign(d) |d|^{-2s} (relative)", worst,
                       cfg.number("tolerance"));
  });
}

void suite_profile(Context& cx) {
  const auto& cfg = cx.cfg;
  const QuadratureSpec q = quadrature(cfg);
  const double tol = cfg.number("profile_tol");
  const auto svals = cfg.numbers("s_values");
  std::vector<std::shared_ptr<const Profile>> profiles;
  for (double s : svals) profiles.push_back(load_profile(cfg, s));

  cx.check("AC-3.residual", [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < svals.size(); ++i) {
      cx.row("residual_sup", svals[i], 0, 1, profiles[i]->residual_sup);
      worst = std::max(worst, profiles[i]->residual_sup);
    }
    return upper_bound("discrete residual sup-norm at the nodes", worst, tol);
  });

  cx.check("AC-3.scaling", [&] {
    // |(-d_zz)^s w_eps + eps^{-2s} W'(w_eps)| at eps * z_i against tol / eps^{2s},
    // with the operator evaluated by direct quadrature at scale eps.
    double worst = 0.0;
    for (std::size_t i = 0; i < svals.size(); ++i) {
      const Profile& p = *profiles[i];
      for (double eps : cfg.numbers("scaling_eps")) {
        for (double zr : cfg.numbers("scaling_z")) {
          const double z = std::round(zr / p.h) * p.h;
          const double x = eps * z;
          const double w = eval_profile(p, x, 0, eps);
          const double res = fraclap_profile(p, x, eps, q) + std::pow(eps, -2.0 * svals[i]) * potential(p.potential, w, 1);
          const double ratio = std::fabs(res) * std::pow(eps, 2.0 * svals[i]) / tol;
          cx.row("scaled_residual", svals[i], z, eps, res);
          worst = std::max(worst, ratio);
        }
      }
    }
    return upper_bound("eps-equation residual times eps^{2s} / tol", worst, 1.0);
  });

  cx.check("AC-3.tail", [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < svals.size(); ++i) {
      const ProfileDiagnostics d = verify_profile(*profiles[i]);
      cx.row("tail_match", svals[i], 0, 1, d.tail_match);
      cx.row("decay_constant", svals[i], 0, 1, d.decay_constant);
      worst = std::max(worst, d.tail_match);
    }
    return upper_bound("relative mismatch with the far-field tail on [Z/2, Z]", worst, cfg.number("tail_tolerance"));
  });
}

void suite_potential_limit(Context& cx) {
  const auto& cfg = cx.cfg;
  cx.check("AC-4", [&] {
    double worst = 0.0;
    for (double s : cfg.numbers("s_values")) {
      const auto p = load_profile(cfg, s);
      for (double z : cfg.numbers("z_values")) {
        const auto eps = cfg.ladder("eps");
        std::vector<double> vals;
        for (double e : eps) {
          vals.push_back(potential_limit_ratio(FracOrder(s), *p, e, z));
          cx.row("potential_ratio", s, z, e, vals.back());
        }
        const SweepResult r = fit_or_keep(eps, vals, FitModel::PowerLaw);
        cx.fit("potential_ratio " + s_tag(s) + " z=" + fmt(z), r);
        worst = std::max(worst, std::fabs(r.extrapolated - 1.0));
      }
    }
    return upper_bound("|extrapolated ratio - 1|", worst, cfg.number("tolerance"));
  });
}

void suite_exact_identities(Context& cx) {
  const auto& cfg = cx.cfg;
  const QuadratureSpec q = quadrature(cfg);
  cx.check("AC-5.formula-eta", [&] {
    std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.number("seed")));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const auto svals = cfg.numbers("identity_s");
    std::vector<std::shared_ptr<const Profile>> ps;
    for (double s : svals) ps.push_back(load_profile(cfg, s));
    double worst = 0.0;
    const int n = cfg.integer("samples");
    for (int i = 0; i < n; ++i) {
      const double z0 = -2.0 + 4.0 * U(rng);
      const double ell = 0.05 + 2.0 * U(rng);
      const double eps = 0.01 + U(rng);
      const std::size_t k = static_cast<std::size_t>(i) % ps.size();
      const IdentitySides r = formula_eta_identity(*ps[k], z0, ell, eps, q);
      cx.row("formula_eta_gap", svals[k], ell, eps, r.lhs - r.rhs);
      worst = std::max(worst, std::fabs(r.lhs - r.rhs));
    }
    return upper_bound("|lhs - rhs| over randomized (z0, l, eps)", worst, cfg.number("identity_tolerance"));
  });
  cx.check("AC-5.kernel", [&] {
    double worst = 0.0;
    for (double d : cfg.numbers("kernel_d")) {
      for (double s : cfg.numbers("kernel_s")) {
        for (double a : cfg.numbers("kernel_a")) {
          const KernelCheck k = reduction_kernel(static_cast<int>(d), FracOrder(s), a, q);
          cx.row("reduction_kernel_d" + fmt(d), s, a, 0, k.quadrature);
          worst = std::max(worst, std::fabs(k.quadrature - k.closed_form) / k.closed_form);
        }
      }
    }
    return upper_bound("reduction kernel quadrature against closed form (relative)", worst,
                       cfg.number("kernel_tolerance"));
  });
  cx.check("AC-5.log-expansion", [&] {
    double worst = 0.0;
    std::string note;
    for (int d : {2, 3}) {
      // d = 2 uses the second-moment integrand, d = 3 the |y|^{2+alpha} one.
      const LogVariant v = d == 2 ? LogVariant::Moment2 : LogVariant::General;
      std::vector<double> x, y;
      for (double dl : cfg.numbers("log_deltas")) {
        x.push_back(std::log(dl));
        y.push_back(log_expansion_integral(d, dl, v, cfg.number("log_alpha"), q));
        cx.row("log_expansion_d" + std::to_string(d), 0.5, dl, 0, y.back());
      }
      const double xm = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
      const double ym = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - xm) * (y[i] - ym);
        sxx += (x[i] - xm) * (x[i] - xm);
      }
      const double slope = sxy / sxx;
      const double target = (d - 1) * gamma_ds(1, FracOrder(1, 2)) / gamma_ds(d, FracOrder(1, 2));
      cx.row("log_slope_d" + std::to_string(d), 0.5, target, 0, slope);
      note += "d=" + std::to_string(d) + " slope " + fmt(slope) + " target " + fmt(target) + "; ";
      worst = std::max(worst, std::fabs(slope - target) / target);
    }
    return upper_bound("fitted log-slope against (d-1) gamma_{1,1/2} / gamma_{d,1/2} (relative)", worst,
                       cfg.number("log_tolerance"), note);
  });
}

void suite_n_exponents(Context& cx) {
  const auto& cfg = cx.cfg;
  const QuadratureSpec q = quadrature(cfg);
  const double R = cfg.number("radius");
  const SetDescriptor disk = SetDescriptor::ball({0.0, 0.0}, R);
  const DomainWindow omega = DomainWindow::parse(cfg.text("window"));
  for (double s : cfg.numbers("slope_s")) {
    cx.check("AC-6.slope-" + s_tag(s), [&] {
      std::vector<double> d, v;
      for (double dist : cfg.numbers("slope_distances")) {
        const double n = n_integrand(disk, FracOrder(s), std::nullopt, {R - dist, 0.0}, q);
        cx.row("pointwise_residual", s, dist, 0, n);
        d.push_back(dist);
        v.push_back(std::fabs(n));
      }
      const double slope = loglog_slope(d, v);
      const bool above = s > 0.5;
      const double target = above ? 1.0 - 2.0 * s : 0.0;
      const double tol = above ? cfg.number("slope_tolerance_above") : cfg.number("slope_tolerance_below");
      return near_value("log-log slope of the pointwise residual against distance", slope, target, tol, false);
    });
  }
  cx.check("AC-6.divergence", [&] {
    const double s = cfg.number("divergent_s");
    Criterion c;
    c.description = "N_s integral flags divergence under refinement";
    c.expected = 1.0;
    try {
      const NReport r = n_functional(disk, FracOrder(s), std::nullopt, omega, q);
      c.measured = r.total;
      c.pass = false;
      c.note = "no divergence detected";
    } catch (const DivergenceDetected& e) {
      c.measured = e.ratio;
      c.pass = true;
      c.note = "shell growth ratio " + fmt(e.ratio);
      cx.row("divergence_ratio", s, 0, 0, e.ratio);
    }
    return c;
  });
  cx.check("AC-6.halfspace", [&] {
    double worst = 0.0;
    const SetDescriptor H = SetDescriptor::halfspace({1.0, 0.0});
    for (double s : cfg.numbers("halfspace_s")) {
      const double lib = n_functional(H, FracOrder(s), std::nullopt, omega, q).total;
      // Independent check: the brute-force half-plane operator against the
      // distance term, squared and integrated over the window's x-range.
      const double c = gamma_ds(1, FracOrder(s)) / s;
      auto sq = [&](double x) {
        const double diff = halfplane_indicator_bruteforce(FracOrder(s), x, q) - (x > 0 ? 1.0 : -1.0) * c * std::pow(std::fabs(x), -2.0 * s);
        return diff * diff;
      };
      QuadratureSpec qb = q;
      qb.abs_tol = 1e-20;
      qb.rel_tol = 1e-3;
      const double lo = cfg.number("halfspace_inner");
      const double brute = quad(sq, lo, cfg.number("halfspace_outer"), {}, qb) +
                           quad(sq, -cfg.number("halfspace_outer"), -lo, {}, qb);
      cx.row("n_halfspace", s, 0, 0, lib);
      cx.row("n_halfspace_bruteforce", s, lo, 0, brute);
      worst = std::max({worst, lib, brute});
    }
    return upper_bound("N_s(half-space)", worst, cfg.number("halfspace_tolerance"));
  });
  cx.check("AC-6.disk", [&] {
    const double s = cfg.number("disk_s");
    const NReport r = n_functional(disk, FracOrder(s), std::nullopt, omega, q);
    cx.row("n_disk", s, 0, 0, r.total);
    Criterion c;
    c.description = "N_s(disk) > 0";
    c.measured = r.total;
    c.pass = r.total > 0.0 && std::isfinite(r.total);
    return c;
  });
}

void suite_fermi(Context& cx) {
  const auto& cfg = cx.cfg;
  const QuadratureSpec q = quadrature(cfg);
  const double R = cfg.number("radius");
  ExpansionWindow w{cfg.number("Lambda"), cfg.number("delta"), cfg.number("Lambda0")};
  const SetDescriptor disk = SetDescriptor::ball({0.0, 0.0}, R);
  w.validate(disk.delta0());
  const Modification mod{w.delta, EtaSpec::constant(cfg.number("eta_constant"), cfg.number("eta_constant"),
                                                    cfg.number("blend_width"))};
  for (double s : cfg.numbers("s_values")) {
    cx.check("AC-7." + s_tag(s), [&] {
      const auto p = load_profile(cfg, s);
      double hi = 0.0, lo = std::numeric_limits<double>::infinity();
      for (double eps : cfg.ladder("eps")) {
        double sup = 0.0;
        for (double fr : cfg.numbers("z0_fractions")) {
          const double z0 = fr * w.collar();
          const FieldSpec f{p, disk, mod, eps};
          const RemainderParts r = fermi_remainder(f, {R - z0, 0.0}, w, q);
          cx.row("remainder", s, z0, eps, r.remainder);
          sup = std::max(sup, std::fabs(r.remainder));
        }
        cx.row("remainder_sup", s, 0, eps, sup);
        hi = std::max(hi, sup);
        lo = std::min(lo, sup);
      }
      return upper_bound("max/min of the collar sup-norm of the remainder across eps", hi / lo,
                         cfg.number("ratio_limit"));
    });
  }
}

void suite_willmore(Context& cx) {
  const auto& cfg = cx.cfg;
  const QuadratureSpec q = quadrature(cfg);
  const double delta = cfg.number("delta");
  std::vector<double> ells;
  for (double f : cfg.numbers("ell_fractions")) ells.push_back(f * delta);
  const auto exps = cfg.ladder("eps_exponents");

  for (double s : cfg.numbers("s_values")) {
    cx.check("AC-8." + s_tag(s), [&] {
      const auto p = load_profile(cfg, s);
      std::vector<double> lim;
      for (double ell : ells) {
        std::vector<double> eps, vals;
        for (double k : exps) {
          eps.push_back(ell * std::pow(2.0, -k));
          vals.push_back(willmore_limit_quantity(FracOrder(s), *p, eps.back(), ell, delta, q));
          cx.row("Q", s, ell, eps.back(), vals.back());
        }
        const SweepResult r = fit_or_keep(eps, vals, FitModel::PowerLaw);
        cx.fit("Q " + s_tag(s) + " l=" + fmt(ell), r);
        lim.push_back(r.extrapolated);
        cx.row("Q_extrapolated", s, ell, 0, r.extrapolated);
      }
      bool decreasing = true;
      for (std::size_t i = 1; i < lim.size(); ++i) decreasing = decreasing && lim[i] < lim[i - 1];
      const SweepResult l0 = fit_or_keep(ells, lim, FitModel::PowerLaw);
      cx.fit("Q_limit_in_l " + s_tag(s), l0);
      Criterion c = upper_bound("extrapolated Q at the last l as a share of the first", lim.back() / lim.front(),
                                cfg.number("final_fraction"),
                                "l -> 0 fit of the sequence leaves " + fmt(std::fabs(l0.extrapolated) / lim.front()) +
                                    " of the first" + (decreasing ? "; strictly decreasing" : "; NOT decreasing"));
      c.pass = c.pass && decreasing;
      return c;
    });
  }
  cx.check("AC-8.control", [&] {
    const double s = cfg.number("control_s");
    const auto p = load_profile(cfg, s);
    const double eps = ells.front() * std::pow(2.0, -exps.back());
    std::vector<double> vals;
    for (double ell : ells) {
      vals.push_back(willmore_limit_quantity(FracOrder(s), *p, eps, ell, delta, q));
      cx.row("Q_control", s, ell, eps, vals.back());
    }
    Criterion c;
    c.description = "control order: Q(delta/64) / Q(delta/4) at the smallest eps stays large";
    c.measured = vals.back() / vals.front();
    c.expected = cfg.number("control_floor");
    c.pass = c.measured >= c.expected;
    return c;
  });
}

std::vector<double> f_sweep(Context& cx, const std::shared_ptr<const Profile>& p, const SetDescriptor& E,
                            const DomainWindow& omega, const std::vector<double>& eps, double delta,
                            double delta_prime, const QuadratureSpec& q, const std::string& tag) {
  std::vector<double> vals;
  for (double e : eps) {
    const FieldSpec f = recovery_field(p, E, e, delta, delta_prime);
    vals.push_back(f_energy(f, omega, q).total);
    cx.row(tag, p->s.value(), delta, e, vals.back());
  }
  return vals;
}

std::vector<double> g_sweep(Context& cx, const std::shared_ptr<const Profile>& p, const SetDescriptor& E,
                            const DomainWindow& omega, const std::vector<double>& eps, double delta,
                            double delta_prime, const QuadratureSpec& q) {
  std::vector<double> vals;
  for (double e : eps) {
    const FieldSpec f = recovery_field(p, E, e, delta, delta_prime);
    vals.push_back(g_energy(f, omega, q).total);
    cx.row("G", p->s.value(), delta, e, vals.back());
  }
  return vals;
}

void suite_gamma_limsup(Context& cx) {
  const auto& cfg = cx.cfg;
  const double s = cfg.number("s");
  const FracOrder fs(s);
  const auto p = load_profile(cfg, s);
  const QuadratureSpec q = quadrature(cfg);
  const DomainWindow omega = DomainWindow::parse(cfg.text("omega"));
  const double delta_prime = cfg.number("delta_prime");

  if (fs.regime() == Regime::Sub) {
    const SetDescriptor E = SetDescriptor::parse(cfg.text("set"));
    const double delta = cfg.number("delta");
    cx.check("AC-10.f", [&] {
      const auto eps = cfg.ladder("f_eps");
      const auto vals = f_sweep(cx, p, E, omega, eps, delta, delta_prime, q, "F");
      const SweepResult r = fit_or_keep(eps, vals, FitModel::PowerLaw);
      cx.fit("F " + s_tag(s), r);
      const double target = gamma_ds(1, fs) * frac_perimeter(E, 2.0 * s, omega, q);
      cx.row("gamma_Per_2s", s, 0, 0, target);
      return near_value("extrapolated F against gamma_{1,s} Per_{2s}(E, Omega)", r.extrapolated, target,
                        cfg.number("f_tolerance"), true, "fitted rate " + fmt(r.rate));
    });
    cx.check("AC-10.g", [&] {
      const QuadratureSpec qg = quadrature(cfg, "g_");
      const FieldSpec f0 = recovery_field(p, E, 0.1, delta, delta_prime);
      const NReport n = n_functional(E, fs, f0.mod, omega, q);
      cx.row("N", s, delta, 0, n.total);
      const auto eps = cfg.ladder("g_eps");
      const auto vals = g_sweep(cx, p, E, omega, eps, delta, delta_prime, qg);
      const SweepResult r = fit_or_keep(eps, vals, FitModel::PowerLaw);
      cx.fit("G " + s_tag(s), r);
      return near_value("extrapolated G against N_s(E, beta^{eta,delta})", r.extrapolated, n.total,
                        cfg.number("g_tolerance"), true, "fitted rate " + fmt(r.rate));
    });
    cx.check("AC-10.reduction", [&] {
      QuadratureSpec qc = q;
      qc.rel_tol = cfg.tolerance("claim5_rel_tol");
      const double ell = cfg.number("claim5_ell");
      const auto eps = cfg.ladder("claim5_eps");
      std::vector<double> vals;
      for (double e : eps) {
        vals.push_back(claim5_double_integral(fs, *p, e, ell, qc));
        cx.row("reduction_integral", s, ell, e, vals.back());
      }
      const double slope = loglog_slope(eps, vals);
      return near_value("fitted eps-exponent of the one-dimensional double integral", slope,
                        cfg.number("claim5_exponent"), cfg.number("claim5_tolerance"), false);
    });
    return;
  }

  if (fs.regime() != Regime::Half && fs.regime() != Regime::Mid)
    throw ConfigError("gamma-limsup-d1: s must lie below 3/4");
  const bool half = fs.regime() == Regime::Half;
  const std::string tag = half ? "AC-9.half" : "AC-9";
  const auto lengths = cfg.numbers("lengths");
  const double c_delta = cfg.number("delta");

  cx.check(tag + ".c-star", [&] {
    const auto eps = cfg.ladder("f_eps");
    std::vector<double> cs;
    for (double L : lengths) {
      const SetDescriptor E = SetDescriptor::interval_union({{0.0, L}});
      const double per = classical_perimeter_and_willmore(E, omega).perimeter;
      auto vals = f_sweep(cx, p, E, omega, eps, c_delta, delta_prime, q, "F_L" + fmt(L));
      for (double& v : vals) v /= per;
      const SweepResult r = half ? fit_or_keep(eps, vals, FitModel::Log)
                                 : fit_or_keep(eps, vals, FitModel::PowerLaw, 2.0 * s - 1.0);
      cx.fit("F/Per " + s_tag(s) + " L=" + fmt(L), r);
      cs.push_back(r.extrapolated);
      cx.row("c_star", s, L, 0, r.extrapolated);
    }
    const auto [mn, mx] = std::minmax_element(cs.begin(), cs.end());
    const double mean = std::accumulate(cs.begin(), cs.end(), 0.0) / cs.size();
    return upper_bound("spread of extrapolated F/Per across E (relative)", (*mx - *mn) / mean,
                       cfg.number("c_star_tolerance"), "c_star ~ " + fmt(mean));
  });
  if (half) return;

  const SetDescriptor E = SetDescriptor::interval_union({{0.0, lengths.front()}});
  const auto deltas = cfg.numbers("g_deltas");
  std::vector<double> a_delta;
  cx.check("AC-9.g", [&] {
    const QuadratureSpec qg = quadrature(cfg, "g_");
    double worst = 0.0;
    for (double dl : deltas) {
      const FieldSpec f0 = recovery_field(p, E, 0.1 * dl, dl, delta_prime);
      const NReport n = n_functional(E, fs, f0.mod, omega, q);
      cx.row("N", s, dl, 0, n.total);
      cx.row("N_collar", s, dl, 0, n.collar);
      std::vector<double> eps;
      for (double fct : cfg.ladder("g_eps_factors")) eps.push_back(fct * dl);
      const auto vals = g_sweep(cx, p, E, omega, eps, dl, delta_prime, qg);
      const SweepResult r = fit_or_keep(eps, vals, FitModel::PowerLaw);
      cx.fit("G " + s_tag(s) + " delta=" + fmt(dl), r);
      a_delta.push_back(r.extrapolated - n.rest);
      cx.row("A_delta", s, dl, 0, a_delta.back());
      worst = std::max(worst, std::fabs(r.extrapolated - n.total) / n.total);
    }
    return upper_bound("extrapolated G against A_delta plus the outer part of N (relative)", worst,
                       cfg.number("g_tolerance"));
  });
  cx.check("AC-9.rate", [&] {
    double worst = 0.0;
    std::string note;
    for (std::size_t i = 1; i < a_delta.size(); ++i) {
      const double ratio = (a_delta[i - 1] / a_delta[i]) / (deltas[i - 1] / deltas[i]);
      note += fmt(ratio) + " ";
      worst = std::max(worst, std::fabs(ratio - 1.0));
    }
    return upper_bound("A_delta proportional to delta: worst |ratio - 1|", worst, cfg.number("rate_tolerance"),
                       "normalised ratios " + note);
  });
}

void suite_perimeters(Context& cx) {
  const auto& cfg = cx.cfg;
  const QuadratureSpec q = quadrature(cfg);
  cx.check("AC-11.interval", [&] {
    const SetDescriptor E = SetDescriptor::parse(cfg.text("interval_set"));
    const double v = frac_perimeter(E, cfg.number("interval_sigma"), DomainWindow::whole(), q);
    cx.row("Per_interval", 0, cfg.number("interval_sigma"), 0, v);
    return near_value("closed-form interval perimeter", v, cfg.number("interval_expected"),
                      cfg.number("closed_tolerance"), true);
  });
  cx.check("AC-11.scaling", [&] {
    double worst = 0.0;
    const SetDescriptor E = SetDescriptor::parse(cfg.text("interval_set"));
    const DomainWindow om = DomainWindow::parse(cfg.text("scaling_omega"));
    for (double sg : cfg.numbers("scaling_sigmas")) {
      const double base = frac_perimeter(E, sg, om, q);
      for (double lam : cfg.numbers("scaling_lambdas")) {
        std::vector<std::pair<double, double>> iv;
        for (const auto& [a, b] : E.intervals) iv.emplace_back(lam * a, lam * b);
        const double v = frac_perimeter(SetDescriptor::interval_union(iv), sg,
                                        DomainWindow::interval(lam * om.a, lam * om.b), q);
        cx.row("Per_scaled", sg, lam, 0, v);
        worst = std::max(worst, std::fabs(v / (std::pow(lam, 1.0 - sg) * base) - 1.0));
      }
    }
    return upper_bound("Per_sigma(lambda E, lambda Omega) / (lambda^{d - sigma} Per_sigma(E, Omega)) - 1",
                       worst, cfg.number("scaling_tolerance"));
  });
  const double R = cfg.number("radius");
  const double limit = perimeter_limit_constant(2) * 2.0 * M_PI * R;
  cx.check("AC-11.disk-mc", [&] {
    const double sg = cfg.number("mc_sigma");
    const auto mc = frac_perimeter_disk_mc(R, sg, static_cast<std::int64_t>(cfg.number("mc_samples")),
                                           static_cast<std::uint64_t>(cfg.number("seed")));
    cx.row("Per_disk_mc", sg, R, 0, mc.value);
    cx.row("Per_disk_mc_half_width", sg, R, 0, mc.half_width);
    return near_value("(1 - sigma) Per_sigma(disk) against the sigma -> 1 limit", (1.0 - sg) * mc.value, limit,
                      cfg.number("trend_tolerance"), true, "95% half-width " + fmt((1.0 - sg) * mc.half_width));
  });
  cx.check("AC-11.trend", [&] {
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    std::string note;
    for (double sg : cfg.numbers("disk_sigmas")) {
      const double v = (1.0 - sg) * frac_perimeter(SetDescriptor::ball({0.0, 0.0}, R), sg, DomainWindow::whole(), q);
      cx.row("scaled_Per_disk", sg, R, 0, v);
      const double gap = std::fabs(v - limit) / limit;
      note += fmt(gap) + " ";
      monotone = monotone && gap < prev;
      prev = gap;
    }
    Criterion c = upper_bound("deterministic (1 - sigma) Per_sigma approaches the limit along sigma", prev,
                              cfg.number("trend_tolerance"), "relative gaps " + note);
    c.pass = c.pass && monotone;
    return c;
  });
}

using SuiteFn = void (*)(Context&);

struct SuiteEntry {
  SuiteInfo info;
  SuiteFn fn;
};

const std::vector<SuiteEntry>& catalog() {
  static const std::vector<SuiteEntry> entries = {
      {{"constants", "Normalising constant gamma_{d,s} of the fractional Laplacian and the surface tension sigma_W",
        "AC-1"},
       suite_constants},
      {{"halfspace-identity",
        "Corollary: for any half-space H, (-Delta)^s chi_H = (gamma_{1,s}/s) sign(d) |d|^{-2s}", "AC-2"},
       suite_halfspace},
      {{"profile", "Optimal profile: unique strictly increasing solution with optimal decay of w'", "AC-3"},
       suite_profile},
      {{"potential-limit",
        "Lemma: eps^{-2s} W'(w_eps(z)) -> -(gamma_{1,s}/s) z |z|^{-1-2s} uniformly on {|z| >= alpha}", "AC-4"},
       suite_potential_limit},
      {{"exact-identities", "Lemmas: integration by parts against the log kernel, reduction of the d-dimensional kernel to one "
        "dimension, logarithmic growth of the tangential moment integrals", "AC-5"},
       suite_exact_identities},
      {{"n-exponents", "Proposition: N_s is finite precisely when s < 3/4; pointwise exponents near the boundary",
        "AC-6"},
       suite_n_exponents},
      {{"fermi-expansion",
        "Theorem: expansion of the fractional Laplacian in Fermi coordinates, remainder bounds C Lambda^{2s} "
        "and C Lambda log Lambda",
        "AC-7"},
       suite_fermi},
      {{"willmore-vanishing", "Lemma: the squared curvature-kernel quantity vanishes as l -> 0 for any delta > 0",
        "AC-8"},
       suite_willmore},
      {{"gamma-limsup-d1",
        "Theorem (Gamma-limsup): recovery energy of the optimal profile composed with the modified signed "
        "distance; recovery sequence for the 2s-fractional perimeter below s = 1/2",
        "AC-9, AC-10"},
       suite_gamma_limsup},
      {{"perimeters", "Fractional perimeter: scaling law and (1 - sigma) Per_sigma -> constant times Per as sigma -> 1",
        "AC-11"},
       suite_perimeters},
  };
  return entries;
}

std::map<std::string, std::string> fingerprint() {
  std::map<std::string, std::string> f;
  f["library"] = "fracfield 1.0";
  f["compiler"] = __VERSION__;
  f["cplusplus"] = std::to_string(__cplusplus);
  f["boost"] = BOOST_LIB_VERSION;
  f["hardware_threads"] = std::to_string(std::thread::hardware_concurrency());
#ifdef NDEBUG
  f["assertions"] = "off";
#else
  f["assertions"] = "on";
#endif
  utsname u{};
  if (uname(&u) == 0) {
    f["system"] = u.sysname;
    f["machine"] = u.machine;
  }
  const char* cache = std::getenv("FRACFIELD_CACHE");
  f["profile_cache"] = cache ? cache : "";
  return f;
}

}  // namespace

const std::vector<SuiteInfo>& list_suites() {
  static const std::vector<SuiteInfo> infos = [] {
    std::vector<SuiteInfo> v;
    for (const auto& e : catalog()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

VerdictReport run_suite(const SuiteConfig& config) {
  const SuiteEntry* entry = nullptr;
  for (const auto& e : catalog())
    if (e.info.name == config.suite) entry = &e;
  if (!entry) {
    std::string names;
    for (const auto& e : catalog()) names += (names.empty() ? "" : ", ") + e.info.name;
    throw ConfigError("unknown suite '" + config.suite + "'; available: " + names);
  }
  VerdictReport rep;
  rep.suite = config.suite;
  rep.coarse = config.coarse;
  rep.fingerprint = fingerprint();
  const auto t0 = std::chrono::steady_clock::now();
  Context cx{config, rep};
  entry->fn(cx);
  rep.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string results_csv(const VerdictReport& report) {
  std::ostringstream os;
  os << "quantity,s,param,eps,value\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g", r.s, r.param, r.eps, r.value);
    os << r.quantity << "," << buf << "\n";
  }
  return os.str();
}

std::filesystem::path write_artifacts(const VerdictReport& report, const std::filesystem::path& outdir) {
  using nlohmann::json;
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  std::filesystem::path dir = outdir / report.suite / stamp;
  for (int k = 1; std::filesystem::exists(dir); ++k) dir = outdir / report.suite / (std::string(stamp) + "-" + std::to_string(k));
  std::filesystem::create_directories(dir);

  std::ofstream(dir / "results.csv") << results_csv(report);

  json fits = json::array();
  for (const auto& f : report.fits) {
    fits.push_back({{"name", f.name},
                    {"eps", f.fit.eps},
                    {"values", f.fit.values},
                    {"extrapolated", f.fit.extrapolated},
                    {"rate", f.fit.rate},
                    {"coefficient", f.fit.coefficient},
                    {"residual", f.fit.residual}});
  }
  std::ofstream(dir / "fit.json") << fits.dump(2) << "\n";

  json crit = json::array();
  for (const auto& c : report.criteria) {
    crit.push_back({{"id", c.id},
                    {"description", c.description},
                    {"measured", c.measured},
                    {"expected", c.expected},
                    {"tolerance", c.tolerance},
                    {"pass", c.pass},
                    {"note", c.note}});
  }
  const json verdict = {{"suite", report.suite},
                        {"verdict", std::string(report.failed() == 0 ? "PASS" : "FAIL") + (report.coarse ? " (coarse)" : "")},
                        {"coarse", report.coarse},
                        {"failed", report.failed()},
                        {"criteria", crit},
                        {"environment", report.fingerprint},
                        {"wall_clock_seconds", report.wall_clock}};
  std::ofstream(dir / "verdict.json") << verdict.dump(2) << "\n";
  return dir;
}

}  // namespace fracfield
