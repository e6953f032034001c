#include "fracfield/profile.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "fracfield/fraclap.hpp"

namespace fracfield {

namespace {

// Product-integration weights for one grid interval at offset k >= 1:
// integrals of the cubic-spline shape functions against (k + theta)^{-1-2s}.
struct OffsetWeights {
  std::vector<double> a0, a1, b0, b1;
};

OffsetWeights offset_weights(double s, double h, int kmax) {
  using GL = boost::math::quadrature::gauss<double, 20>;
  OffsetWeights w;
  w.a0.assign(kmax + 1, 0.0);
  w.a1 = w.a0;
  w.b0 = w.a0;
  w.b1 = w.a0;
  const double e = -1.0 - 2.0 * s;
  for (int k = 1; k <= kmax; ++k) {
    double P[4];
    for (int m = 0; m < 4; ++m) {
      P[m] = GL::integrate([&](double t) { return std::pow(t, m) * std::pow(k + t, e); }, 0.0, 1.0);
    }
    w.a0[k] = P[0] - P[1];
    w.a1[k] = P[1];
    w.b0[k] = h * h / 6.0 * (-P[3] + 3.0 * P[2] - 2.0 * P[1]);
    w.b1[k] = h * h / 6.0 * (P[3] - P[1]);
  }
  return w;
}

// int_A^inf (z + t)^{-2s} t^{-1-2s} dt, written with t = A / v.
double tail_moment(double s, double z, double A) {
  QuadratureSpec q;
  q.rel_tol = 1e-13;
  q.abs_tol = 1e-16;
  auto f = [&](double v) { return std::pow(z * v + A, -2.0 * s) * std::pow(v, 4.0 * s - 1.0); };
  return std::pow(A, -2.0 * s) * integrate(f, 0.0, 1.0, {algebraic(0.0, 4.0 * s - 1.0)}, q).value;
}

// Solves a symmetric tridiagonal system for many right-hand sides.
class Tridiagonal {
 public:
  Tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup)
      : a_(std::move(sub)), b_(std::move(diag)), c_(std::move(sup)) {
    const std::size_t n = b_.size();
    cp_.assign(n, 0.0);
    denom_.assign(n, 0.0);
    denom_[0] = b_[0];
    cp_[0] = c_[0] / denom_[0];
    for (std::size_t i = 1; i < n; ++i) {
      denom_[i] = b_[i] - a_[i] * cp_[i - 1];
      cp_[i] = (i + 1 < n) ? c_[i] / denom_[i] : 0.0;
    }
  }

  void solve(double* x) const {
    const std::size_t n = b_.size();
    x[0] /= denom_[0];
    for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - a_[i] * x[i - 1]) / denom_[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp_[i] * x[i + 1];
  }

 private:
  std::vector<double> a_, b_, c_, cp_, denom_;
};

struct Discretisation {
  int N;
  double h;
  double S_N;        // fixed value at Z from the far-field expansion
  Eigen::MatrixXd A; // linear part of the operator on interior unknowns
  Eigen::VectorXd c; // affine part (boundary data and tails)
  Eigen::MatrixXd P; // second derivatives M = P S + q
  Eigen::VectorXd q;
};

Discretisation assemble(const FracOrder& order, double lambda, double Z, int N) {
  const double s = order.value();
  const double h = Z / N;
  const double gam = gamma_ds(1, order);
  const double coeff = gam / (s * lambda);
  Discretisation D;
  D.N = N;
  D.h = h;
  D.S_N = 1.0 - coeff * std::pow(Z, -2.0 * s);
  const double slope_N = 2.0 * s * coeff * std::pow(Z, -1.0 - 2.0 * s);
  const int n = N - 1;  // interior unknowns S_1..S_{N-1}

  // Spline second derivatives: M_1..M_N from interior data, odd symmetry at
  // the origin (M_0 = 0) and a clamped slope at Z.
  std::vector<double> sub(N, h / 6.0), diag(N, 2.0 * h / 3.0), sup(N, h / 6.0);
  diag[N - 1] = h / 3.0;
  sub[0] = 0.0;
  sup[N - 1] = 0.0;
  Tridiagonal T(sub, diag, sup);
  D.P = Eigen::MatrixXd::Zero(N, n);
  D.q = Eigen::VectorXd::Zero(N);
  for (int j = 1; j <= N - 1; ++j) {
    const int row = j - 1;
    if (j + 1 <= N - 1) D.P(row, j) += 1.0 / h;
    else D.q(row) += D.S_N / h;
    D.P(row, j - 1) += -2.0 / h;
    if (j - 1 >= 1) D.P(row, j - 2) += 1.0 / h;
  }
  D.P(N - 1, N - 2) += 1.0 / h;
  D.q(N - 1) += slope_N - D.S_N / h;
  for (int col = 0; col < n; ++col) T.solve(D.P.col(col).data());
  T.solve(D.q.data());

  Eigen::MatrixXd Aop = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd Bop = Eigen::MatrixXd::Zero(n, N);
  Eigen::VectorXd cvec = Eigen::VectorXd::Zero(n);

  const OffsetWeights ow = offset_weights(s, h, 2 * N);
  const double hs = std::pow(h, -2.0 * s);
  const double h2 = std::pow(h, 2.0 - 2.0 * s);

  for (int i = 1; i <= N - 1; ++i) {
    const int row = i - 1;
    auto addS = [&](int m, double v) {
      const double sg = m < 0 ? -1.0 : 1.0;
      const int j = std::abs(m);
      if (j == 0) return;
      if (j == N) cvec(row) += v * sg * D.S_N;
      else Aop(row, j - 1) += v * sg;
    };
    auto addM = [&](int m, double v) {
      const double sg = m < 0 ? -1.0 : 1.0;
      const int j = std::abs(m);
      if (j == 0) return;
      Bop(row, j - 1) += v * sg;
    };
    // |t| < h: Taylor form of the symmetric second difference of the spline.
    const double c2 = h2 / (2.0 - 2.0 * s);
    const double c3 = h2 / (6.0 * (3.0 - 2.0 * s));
    addM(i, -c2 + 2.0 * c3);
    addM(i + 1, -c3);
    addM(i - 1, -c3);
    addS(i, hs / s);
    for (int k = 1; i + k + 1 <= N; ++k) {
      addS(i + k, -hs * ow.a0[k]);
      addS(i + k + 1, -hs * ow.a1[k]);
      addM(i + k, -hs * ow.b0[k]);
      addM(i + k + 1, -hs * ow.b1[k]);
    }
    for (int k = 1; i - k - 1 >= -N; ++k) {
      const int m = i - k;
      addS(m, -hs * ow.a0[k]);
      addS(m - 1, -hs * ow.a1[k]);
      addM(m, -hs * ow.b0[k]);
      addM(m - 1, -hs * ow.b1[k]);
    }
    const double zi = i * h;
    const double A = (N - i) * h;
    const double B = (N + i) * h;
    const double TR = std::pow(A, -2.0 * s) / (2.0 * s) - coeff * tail_moment(s, zi, A);
    const double TL = -(std::pow(B, -2.0 * s) / (2.0 * s) - coeff * tail_moment(s, -zi, B));
    cvec(row) -= TR + TL;
  }
  D.A = gam * (Aop + Bop * D.P);
  D.c = gam * (cvec + Bop * D.q);
  return D;
}

bool strictly_increasing(const Eigen::VectorXd& S, double S_N) {
  double prev = 0.0;
  for (int i = 0; i < S.size(); ++i) {
    if (!(S(i) > prev) || !(S(i) < 1.0)) return false;
    prev = S(i);
  }
  return prev < S_N;
}

}  // namespace

Profile solve_profile(const FracOrder& s, const PotentialSpec& spec, ProfileGrid grid, double tol) {
  if (!(grid.Z >= 30.0)) throw DomainError("solve_profile: Z must be at least 30");
  if (!(grid.h > 0.0 && grid.h <= 0.1)) throw DomainError("solve_profile: h must lie in (0, 0.1]");
  if (!(tol >= 1e-8)) throw DomainError("solve_profile: tol must be at least 1e-8");
  const int N = static_cast<int>(std::lround(grid.Z / grid.h));
  const double sv = s.value();
  Discretisation D = assemble(s, spec.lambda, grid.Z, N);
  const int n = N - 1;
  const double coeff = gamma_ds(1, s) / (sv * spec.lambda);

  // Initial guess: tanh(z/2) times a shifted far-field factor, scaled so that
  // the guess stays strictly increasing and below the boundary value at Z.
  double shift = 1.0;
  auto tail_scale = [&](double a) { return coeff * std::pow((a + grid.Z) / grid.Z, 2.0 * sv); };
  while (tail_scale(shift) * std::pow(shift, -2.0 * sv) > 0.5) shift *= 2.0;
  const double ceff = tail_scale(shift);
  Eigen::VectorXd S(n);
  for (int j = 1; j <= n; ++j) {
    const double z = j * D.h;
    S(j - 1) = std::tanh(0.5 * z) * (1.0 - ceff * std::pow(shift + z, -2.0 * sv));
  }
  auto residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd F = D.A * v + D.c;
    for (int i = 0; i < n; ++i) F(i) += potential(spec, v(i), 1);
    return F;
  };

  const double target = std::max(1e-13, 1e-3 * tol);
  Eigen::VectorXd F = residual(S);
  double res = F.cwiseAbs().maxCoeff();
  // Newton iteration with a pseudo-time shift I/dt. Rejected steps shrink
  // dt, accepted ones grow it by the residual ratio, so the iteration turns
  // into undamped Newton once it is in the basin of the monotone solution.
  double dt = 1.0;
  int rejected_monotone = 0;
  for (int it = 0; it < 400 && res > target; ++it) {
    Eigen::MatrixXd J = D.A;
    for (int i = 0; i < n; ++i) J(i, i) += potential(spec, S(i), 2) + 1.0 / dt;
    Eigen::VectorXd step = J.partialPivLu().solve(-F);
    Eigen::VectorXd trial = S + step;
    const double fnorm = F.norm();
    bool ok = strictly_increasing(trial, D.S_N);
    if (!ok) ++rejected_monotone;
    Eigen::VectorXd Ft;
    if (ok) {
      Ft = residual(trial);
      ok = Ft.norm() < 2.0 * fnorm;
    }
    if (!ok) {
      dt *= 0.25;
      if (dt < 1e-10) {
        if (rejected_monotone > 0) throw MonotonicityLoss("solve_profile: iterate lost strict monotonicity");
        throw NonConvergence("solve_profile: step control failed", res, res);
      }
      continue;
    }
    const double ratio = fnorm / Ft.norm();
    S = trial;
    F = Ft;
    res = F.cwiseAbs().maxCoeff();
    dt = std::min(1e12, dt * std::clamp(ratio, 0.5, 10.0));
    if (step.cwiseAbs().maxCoeff() < 1e-15) break;
  }
  if (!(res <= tol)) throw NonConvergence("solve_profile: residual above tolerance", res, res);

  Profile p;
  p.s = s;
  p.potential = spec;
  p.Z = grid.Z;
  p.h = D.h;
  p.tail_coeff = coeff;
  p.residual_sup = res;
  p.w.assign(N + 1, 0.0);
  p.m.assign(N + 1, 0.0);
  for (int j = 1; j <= n; ++j) p.w[j] = S(j - 1);
  p.w[N] = D.S_N;
  Eigen::VectorXd M = D.P * S + D.q;
  for (int j = 1; j <= N; ++j) p.m[j] = M(j - 1);
  return p;
}

double eval_profile(const Profile& p, double z, int order, double eps) {
  if (!(eps > 0.0)) throw DomainError("eval_profile: eps must be positive");
  if (order < 0 || order > 2) throw DomainError("eval_profile: order must be 0..2");
  const double sg = z < 0.0 ? -1.0 : 1.0;
  const double zeta = std::fabs(z) / eps;
  const double s = p.s.value();
  double v;
  if (zeta <= p.Z) {
    const int N = static_cast<int>(p.w.size()) - 1;
    int j = static_cast<int>(zeta / p.h);
    if (j >= N) j = N - 1;
    const double h = p.h;
    const double t = (zeta - j * h) / h;
    const double u = 1.0 - t;
    const double w0 = p.w[j], w1 = p.w[j + 1], m0 = p.m[j], m1 = p.m[j + 1];
    switch (order) {
      case 0: v = w0 * u + w1 * t + h * h / 6.0 * (m0 * (u * u * u - u) + m1 * (t * t * t - t)); break;
      case 1: v = (w1 - w0) / h + h / 6.0 * (m0 * (1.0 - 3.0 * u * u) + m1 * (3.0 * t * t - 1.0)); break;
      default: v = m0 * u + m1 * t; break;
    }
  } else {
    const double c = p.tail_coeff;
    switch (order) {
      case 0: v = 1.0 - c * std::pow(zeta, -2.0 * s); break;
      case 1: v = 2.0 * s * c * std::pow(zeta, -1.0 - 2.0 * s); break;
      default: v = -2.0 * s * (1.0 + 2.0 * s) * c * std::pow(zeta, -2.0 - 2.0 * s); break;
    }
  }
  if (order != 1) v *= sg;
  return v / std::pow(eps, order);
}

ProfileDiagnostics verify_profile(const Profile& p) {
  ProfileDiagnostics d{0.0, 0.0, p.residual_sup};
  const double s = p.s.value();
  const int N = static_cast<int>(p.w.size()) - 1;
  // The value at Z is pinned to the far-field expansion, which leaves a thin
  // layer of spline ringing just inside Z; the decay bound skips it.
  const double layer = 1.0;
  for (int i = 0; i <= N; ++i) {
    const double z = i * p.h;
    if (z >= 0.5 * p.Z) {
      const double model = p.tail_coeff * std::pow(z, -2.0 * s);
      d.tail_match = std::max(d.tail_match, std::fabs((1.0 - p.w[i]) - model) / model);
    }
    if (z > p.Z - layer) continue;
    const double w1 = eval_profile(p, z, 1);
    const double w2 = p.m[i];
    d.decay_constant = std::max(d.decay_constant, (std::fabs(z * w2) + std::fabs(w1)) * (1.0 + std::pow(z, 1.0 + 2.0 * s)));
  }
  return d;
}

double profile_residual_quadrature(const Profile& p, double z, const QuadratureSpec& spec) {
  QuadratureSpec q = spec;
  // Every spline knot is a jump of the third derivative.
  q.max_subdivisions = std::max(q.max_subdivisions, 40000);
  // Thousands of pieces each carry a rounding floor near 1e-15.
  q.abs_tol = std::max(q.abs_tol, 1e-11);
  const double lap = fraclap_profile(p, z, 1.0, q);
  return lap + potential(p.potential, eval_profile(p, z, 0), 1);
}

std::string serialize_profile(const Profile& p) {
  std::ostringstream os;
  os.precision(17);
  os << "fracfield-profile 1\n";
  os << "s " << p.s.str() << "\n";
  os << "lambda " << p.potential.lambda << "\n";
  os << "potential " << p.potential.str() << "\n";
  os << "Z " << p.Z << "\n";
  os << "h " << p.h << "\n";
  os << "tail_coeff " << p.tail_coeff << "\n";
  os << "residual_sup " << p.residual_sup << "\n";
  os << "nodes " << p.w.size() << "\n";
  for (std::size_t i = 0; i < p.w.size(); ++i) os << i * p.h << " " << p.w[i] << " " << p.m[i] << "\n";
  return os.str();
}

Profile deserialize_profile(const std::string& text) {
  std::istringstream is(text);
  std::string key, magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "fracfield-profile" || version != 1) throw ConfigError("not a profile file");
  Profile p;
  std::size_t nodes = 0;
  while (is >> key) {
    if (key == "s") {
      std::string v;
      is >> v;
      p.s = FracOrder::parse(v);
    } else if (key == "lambda") {
      is >> p.potential.lambda;
    } else if (key == "potential") {
      std::string line;
      std::getline(is, line);
      std::istringstream ls(line);
      std::string kind;
      ls >> kind;
      if (kind == "quartic") {
        p.potential = PotentialSpec::quartic();
      } else {
        std::vector<double> c;
        double x;
        while (ls >> x) c.push_back(x);
        p.potential = PotentialSpec::custom(c);
      }
    } else if (key == "Z") {
      is >> p.Z;
    } else if (key == "h") {
      is >> p.h;
    } else if (key == "tail_coeff") {
      is >> p.tail_coeff;
    } else if (key == "residual_sup") {
      is >> p.residual_sup;
    } else if (key == "nodes") {
      is >> nodes;
      p.w.resize(nodes);
      p.m.resize(nodes);
      for (std::size_t i = 0; i < nodes; ++i) {
        double z;
        is >> z >> p.w[i] >> p.m[i];
      }
      break;
    } else {
      throw ConfigError("unknown profile header key '" + key + "'");
    }
  }
  if (!is || nodes < 2) throw ConfigError("truncated profile file");
  return p;
}

Profile cached_profile(const FracOrder& s, const PotentialSpec& spec, ProfileGrid grid, double tol) {
  static std::mutex mu;
  static std::map<std::string, Profile> memo;
  std::ostringstream key;
  key.precision(12);
  key << "profile_s" << s.num() << "-" << s.den() << "_Z" << grid.Z << "_h" << grid.h << "_tol" << tol << "_"
      << (spec.kind == PotentialSpec::Kind::Quartic ? std::string("quartic")
                                                    : std::to_string(std::hash<std::string>{}(spec.str())));
  const std::string name = key.str();
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = memo.find(name); it != memo.end()) return it->second;
  const char* dir = std::getenv("FRACFIELD_CACHE");
  std::filesystem::path file;
  if (dir && *dir) {
    file = std::filesystem::path(dir) / (name + ".txt");
    if (std::filesystem::exists(file)) {
      std::ifstream in(file);
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        Profile p = deserialize_profile(buf.str());
        memo.emplace(name, p);
        return p;
      } catch (const Error&) {
        // unreadable cache entry: fall through and re-solve
      }
    }
  }
  Profile p = solve_profile(s, spec, grid, tol);
  if (!file.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(file.parent_path(), ec);
    std::ofstream out(file);
    out << serialize_profile(p);
  }
  memo.emplace(name, p);
  return p;
}

}  // namespace fracfield
