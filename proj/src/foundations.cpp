#include "fracfield/foundations.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace fracfield {

namespace {

// Parses a plain decimal or scientific literal into an exact fraction.
bool decimal_to_fraction(const std::string& text, std::int64_t& num, std::int64_t& den) {
  std::string mant = text;
  int exp10 = 0;
  auto epos = text.find_first_of("eE");
  if (epos != std::string::npos) {
    mant = text.substr(0, epos);
    try {
      exp10 = std::stoi(text.substr(epos + 1));
    } catch (...) {
      return false;
    }
  }
  bool neg = false;
  if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
    neg = mant[0] == '-';
    mant = mant.substr(1);
  }
  std::int64_t n = 0;
  int frac_digits = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (char c : mant) {
    if (c == '.') {
      if (seen_point) return false;
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return false;
    any_digit = true;
    if (n > (INT64_MAX - 9) / 10) return false;
    n = n * 10 + (c - '0');
    if (seen_point) ++frac_digits;
  }
  if (!any_digit) return false;
  int shift = frac_digits - exp10;
  std::int64_t d = 1;
  while (shift > 0) {
    if (d > INT64_MAX / 10) return false;
    d *= 10;
    --shift;
  }
  while (shift < 0) {
    if (n > INT64_MAX / 10) return false;
    n *= 10;
    ++shift;
  }
  num = neg ? -n : n;
  den = d;
  return true;
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Sub: return "sub";
    case Regime::Half: return "half";
    case Regime::Mid: return "mid";
    case Regime::ThreeQuarter: return "three-quarter";
    case Regime::Super: return "super";
  }
  return "?";
}

FracOrder::FracOrder(std::int64_t num, std::int64_t den) { init(num, den); }

FracOrder::FracOrder(double s) {
  if (!std::isfinite(s)) throw DomainError("fractional order must be finite");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), s);
  std::int64_t n = 0, d = 1;
  if (!decimal_to_fraction(std::string(buf, res.ptr), n, d)) {
    throw DomainError("cannot represent fractional order exactly");
  }
  init(n, d);
}

FracOrder FracOrder::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    try {
      std::size_t used_a = 0, used_b = 0;
      std::string a = text.substr(0, slash), b = text.substr(slash + 1);
      long long n = std::stoll(a, &used_a);
      long long d = std::stoll(b, &used_b);
      if (used_a != a.size() || used_b != b.size()) throw DomainError("bad fraction");
      return FracOrder(n, d);
    } catch (const DomainError&) {
      throw;
    } catch (...) {
      throw DomainError("cannot parse fractional order '" + text + "'");
    }
  }
  std::int64_t n = 0, d = 1;
  if (!decimal_to_fraction(text, n, d)) {
    throw DomainError("cannot parse fractional order '" + text + "'");
  }
  return FracOrder(n, d);
}

void FracOrder::init(std::int64_t num, std::int64_t den) {
  if (den == 0) throw DomainError("fractional order with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num <= 0 || num >= den) throw DomainError("fractional order must lie in (0,1)");
  num_ = num;
  den_ = den;
  s_ = static_cast<double>(num) / static_cast<double>(den);
  // Exact comparisons against 1/2 and 3/4 on the integers.
  const __int128 two_n = static_cast<__int128>(2) * num;
  const __int128 four_n = static_cast<__int128>(4) * num;
  const __int128 three_d = static_cast<__int128>(3) * den;
  if (two_n < den) {
    regime_ = Regime::Sub;
  } else if (two_n == den) {
    regime_ = Regime::Half;
  } else if (four_n < three_d) {
    regime_ = Regime::Mid;
  } else if (four_n == three_d) {
    regime_ = Regime::ThreeQuarter;
  } else {
    regime_ = Regime::Super;
  }
}

std::string FracOrder::str() const {
  std::ostringstream os;
  os << num_ << "/" << den_;
  return os.str();
}

double lanczos_gamma(double x) {
  static constexpr std::array<double, 9> p = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;
  if (x < 0.5) {
    return M_PI / (std::sin(M_PI * x) * lanczos_gamma(1.0 - x));
  }
  x -= 1.0;
  double a = p[0];
  const double t = x + g + 0.5;
  for (int i = 1; i < 9; ++i) a += p[i] / (x + i);
  return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

double gamma_ds(int d, const FracOrder& s) {
  if (d < 1 || d > 3) throw DomainError("gamma_ds: dimension must be 1, 2 or 3");
  const double sv = s.value();
  return sv * std::pow(2.0, 2.0 * sv) * std::pow(M_PI, -0.5 * d) *
         lanczos_gamma(0.5 * (d + 2.0 * sv)) / lanczos_gamma(1.0 - sv);
}

ScalePair scalings(const FracOrder& s, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("scalings: eps must lie in (0,1)");
  const double sv = s.value();
  const double inv_log = 1.0 / std::fabs(std::log(eps));
  ScalePair out{1.0, 1.0};
  switch (s.regime()) {
    case Regime::Sub: out.alpha = 1.0; break;
    case Regime::Half: out.alpha = inv_log; break;
    default: out.alpha = std::pow(eps, 2.0 * sv - 1.0); break;
  }
  switch (s.regime()) {
    case Regime::ThreeQuarter: out.beta = inv_log; break;
    case Regime::Super: out.beta = std::pow(eps, 4.0 * sv - 3.0); break;
    default: out.beta = 1.0; break;
  }
  return out;
}

PotentialSpec PotentialSpec::quartic() {
  PotentialSpec p;
  p.kind = Kind::Quartic;
  p.coeffs = {1.0, 0.0, -2.0, 0.0, 1.0};
  p.lambda = 8.0;
  return p;
}

PotentialSpec PotentialSpec::custom(std::vector<double> coeffs) {
  PotentialSpec p;
  p.kind = Kind::CustomPolynomial;
  p.coeffs = std::move(coeffs);
  if (p.coeffs.size() < 3) throw DomainError("custom potential needs degree >= 2");
  for (std::size_t k = 1; k < p.coeffs.size(); k += 2) {
    if (p.coeffs[k] != 0.0) throw DomainError("custom potential must be even");
  }
  const double scale = std::max(1.0, std::fabs(potential(p, 0.0, 0)));
  if (std::fabs(potential(p, 1.0, 0)) > 1e-12 * scale) throw DomainError("W(1) must vanish");
  if (std::fabs(potential(p, 1.0, 1)) > 1e-12 * scale) throw DomainError("W'(1) must vanish");
  p.lambda = potential(p, 1.0, 2);
  if (!(p.lambda > 0.0)) throw DomainError("W''(1) must be positive");
  // Nonnegativity and strictness of the wells, sampled densely.
  for (int i = 0; i <= 4000; ++i) {
    const double u = -4.0 + 8.0 * i / 4000.0;
    const double v = potential(p, u, 0);
    const bool near_well = std::fabs(std::fabs(u) - 1.0) < 1e-9;
    if (v < -1e-12 * scale || (!near_well && v <= 0.0 && std::fabs(u) < 1.0)) {
      throw DomainError("W must be positive away from the wells");
    }
  }
  if (p.coeffs.back() < 0.0) throw DomainError("W must be bounded below");
  return p;
}

PotentialSpec PotentialSpec::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("potential scale must be positive");
  PotentialSpec p = *this;
  for (double& c : p.coeffs) c *= factor;
  p.lambda *= factor;
  if (factor != 1.0) p.kind = Kind::CustomPolynomial;
  return p;
}

std::string PotentialSpec::str() const {
  if (kind == Kind::Quartic) return "quartic";
  std::ostringstream os;
  os.precision(17);
  os << "poly";
  for (double c : coeffs) os << " " << c;
  return os.str();
}

double potential(const PotentialSpec& spec, double u, int order) {
  if (order < 0 || order > 3) throw DomainError("potential: order must be 0..3");
  if (spec.kind == PotentialSpec::Kind::Quartic) {
    const double u2 = u * u;
    switch (order) {
      case 0: return (1.0 - u2) * (1.0 - u2);
      case 1: return 4.0 * u * (u2 - 1.0);
      case 2: return 12.0 * u2 - 4.0;
      default: return 24.0 * u;
    }
  }
  // Horner on the differentiated coefficient list.
  const auto& c = spec.coeffs;
  double acc = 0.0;
  for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(order);) {
    double fall = 1.0;
    for (int j = 0; j < order; ++j) fall *= static_cast<double>(k - j);
    acc = acc * u + c[k] * fall;
  }
  return acc;
}

double sigma_w(const PotentialSpec& spec) {
  QuadratureSpec q;
  q.rel_tol = 1e-13;
  q.abs_tol = 1e-15;
  auto f = [&](double t) { return std::sqrt(std::max(0.0, 2.0 * potential(spec, t, 0))); };
  return integrate(f, -1.0, 1.0, {algebraic(-1.0, 1.0), algebraic(1.0, 1.0)}, q).value;
}

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("quadrature tolerances must be positive");
  if (max_subdivisions < 1) throw DomainError("quadrature budget must be positive");
  if (!(pv_cutoff > 0.0)) throw DomainError("pv_cutoff must be positive");
  if (!(tail_cutoff > pv_cutoff)) throw DomainError("tail_cutoff must exceed pv_cutoff");
}

QuadratureSpec QuadratureSpec::coarsened(double factor) const {
  QuadratureSpec q = *this;
  q.rel_tol *= factor;
  q.abs_tol *= factor;
  return q;
}

SingularPoint kink(double at) { return {at, PointKind::Kink, 0.0}; }
SingularPoint algebraic(double at, double exponent) { return {at, PointKind::Algebraic, exponent}; }
SingularPoint logarithmic(double at) { return {at, PointKind::Log, 0.0}; }

std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& fn,
                                 unsigned workers) {
  std::vector<double> out(n, 0.0);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace fracfield
