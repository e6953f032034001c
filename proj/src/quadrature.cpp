#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracfield/foundations.hpp"

namespace fracfield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTanhSinhHalfRange = 6.0;

// A piece of the original domain together with the change of variables used
// to integrate it. The engine only ever sees x on [xa, xb].
struct Segment {
  enum class Map { Linear, TanhSinh, InverseTanhSinh } map = Map::Linear;
  double p = 0.0, q = 0.0;  // original (Linear, TanhSinh) or u-range (InverseTanhSinh)
  double xa = 0.0, xb = 0.0;
};

struct Piece {
  int seg;
  double a, b;
  double val, err;
  bool operator<(const Piece& o) const { return err < o.err; }
};

class Engine {
 public:
  Engine(const Integrand& f, const QuadratureSpec& spec) : f_(f), spec_(spec) {}

  double transformed(const Segment& s, double x) {
    ++evals_;
    switch (s.map) {
      case Segment::Map::Linear:
        return f_(x);
      case Segment::Map::TanhSinh: {
        double t, jac;
        if (!tanh_sinh(s.p, s.q, x, t, jac)) return 0.0;
        return jac == 0.0 ? 0.0 : f_(t) * jac;
      }
      case Segment::Map::InverseTanhSinh: {
        double u, jac;
        if (!tanh_sinh(s.p, s.q, x, u, jac)) return 0.0;
        if (u == 0.0 || jac == 0.0) return 0.0;
        const double t = 1.0 / u;
        if (!std::isfinite(t)) return 0.0;
        const double w = (jac / u) / u;
        if (!std::isfinite(w) || w == 0.0) return 0.0;
        return f_(t) * w;
      }
    }
    return 0.0;
  }

  // t = c + hw tanh(pi/2 sinh x) computed from the nearer end.
  static bool tanh_sinh(double p, double q, double x, double& t, double& jac) {
    const double hw = 0.5 * (q - p);
    const double u = 0.5 * M_PI * std::sinh(x);
    const double e = std::exp(-std::fabs(2.0 * u));
    const double dist = 2.0 * hw * e / (1.0 + e);  // distance to nearer end
    if (!(dist > 0.0)) return false;
    t = (u < 0.0) ? p + dist : q - dist;
    if (t <= p || t >= q) return false;
    // sech^2(u) = 4 e / (1 + e)^2 with e = exp(-2|u|)
    jac = hw * 0.5 * M_PI * std::cosh(x) * 4.0 * e / ((1.0 + e) * (1.0 + e));
    return std::isfinite(jac);
  }

  void gk15(int seg, double a, double b, double& val, double& err) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    static const auto xk = GK::abscissa();
    static const auto wk = GK::weights();
    static const auto wg = G::weights();
    const Segment& s = segs_[seg];
    const double c = 0.5 * (a + b);
    const double hl = 0.5 * (b - a);
    double fv[15];
    fv[0] = transformed(s, c);
    for (int i = 1; i < 8; ++i) {
      fv[2 * i - 1] = transformed(s, c - hl * xk[i]);
      fv[2 * i] = transformed(s, c + hl * xk[i]);
    }
    double resk = wk[0] * fv[0];
    double resg = wg[0] * fv[0];
    double resabs = std::fabs(resk);
    for (int i = 1; i < 8; ++i) {
      const double pair = fv[2 * i - 1] + fv[2 * i];
      resk += wk[i] * pair;
      resabs += wk[i] * (std::fabs(fv[2 * i - 1]) + std::fabs(fv[2 * i]));
      if (i % 2 == 0) resg += wg[i / 2] * pair;
    }
    const double mean = 0.5 * resk;
    double resasc = wk[0] * std::fabs(fv[0] - mean);
    for (int i = 1; i < 8; ++i) {
      resasc += wk[i] * (std::fabs(fv[2 * i - 1] - mean) + std::fabs(fv[2 * i] - mean));
    }
    val = resk * hl;
    resabs *= std::fabs(hl);
    resasc *= std::fabs(hl);
    double e = std::fabs((resk - resg) * hl);
    if (resasc != 0.0 && e != 0.0) e = resasc * std::min(1.0, std::pow(200.0 * e / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) e = std::max(50.0 * kEps * resabs, e);
    if (!std::isfinite(val)) {
      val = 0.0;
      e = kInf;
    }
    err = e;
  }

  QuadResult run(double a, double b, const std::vector<SingularPoint>& points) {
    build_segments(a, b, points);
    std::priority_queue<Piece> heap;
    double frozen_val = 0.0, frozen_err = 0.0;
    for (int i = 0; i < static_cast<int>(segs_.size()); ++i) {
      const auto& s = segs_[i];
      const int init = (s.map == Segment::Map::Linear) ? 1 : 4;
      for (int k = 0; k < init; ++k) {
        const double lo = s.xa + (s.xb - s.xa) * k / init;
        const double hi = s.xa + (s.xb - s.xa) * (k + 1) / init;
        Piece p{i, lo, hi, 0.0, 0.0};
        gk15(i, lo, hi, p.val, p.err);
        heap.push(p);
      }
    }
    int pieces = static_cast<int>(heap.size());
    for (int iter = 0;; ++iter) {
      // Sums are recomputed from scratch so that no drift accumulates.
      double total = frozen_val, total_err = frozen_err;
      if (iter % 16 == 0 || heap.size() < 64) {
        auto copy = heap;
        while (!copy.empty()) {
          total += copy.top().val;
          total_err += copy.top().err;
          copy.pop();
        }
        running_val_ = total - frozen_val;
        running_err_ = total_err - frozen_err;
      } else {
        total += running_val_;
        total_err += running_err_;
      }
      const double target = std::max(spec_.abs_tol, spec_.rel_tol * std::fabs(total));
      if (total_err <= target || heap.empty()) {
        if (total_err > target || !std::isfinite(total_err)) {
          throw NonConvergence("integrate: subdivision floor reached before tolerance", total, total_err);
        }
        return {total, total_err, evals_};
      }
      if (pieces >= spec_.max_subdivisions) {
        throw NonConvergence("integrate: subdivision budget exhausted", total, total_err);
      }
      Piece worst = heap.top();
      heap.pop();
      const double mid = 0.5 * (worst.a + worst.b);
      const double width = worst.b - worst.a;
      const double scale = std::max({1.0, std::fabs(worst.a), std::fabs(worst.b)});
      if (width < spec_.pv_cutoff * scale || mid <= worst.a || mid >= worst.b) {
        frozen_val += worst.val;
        frozen_err += worst.err;
        running_val_ -= worst.val;
        running_err_ -= worst.err;
        continue;
      }
      Piece l{worst.seg, worst.a, mid, 0.0, 0.0};
      Piece r{worst.seg, mid, worst.b, 0.0, 0.0};
      gk15(l.seg, l.a, l.b, l.val, l.err);
      gk15(r.seg, r.a, r.b, r.val, r.err);
      running_val_ += l.val + r.val - worst.val;
      running_err_ += l.err + r.err - worst.err;
      heap.push(l);
      heap.push(r);
      ++pieces;
    }
  }

 private:
  void add_finite(double p, double q, bool sing_p, bool sing_q) {
    if (!(q > p)) return;
    Segment s;
    if (sing_p || sing_q) {
      s.map = Segment::Map::TanhSinh;
      s.p = p;
      s.q = q;
      s.xa = -kTanhSinhHalfRange;
      s.xb = kTanhSinhHalfRange;
    } else {
      s.map = Segment::Map::Linear;
      s.p = p;
      s.q = q;
      s.xa = p;
      s.xb = q;
    }
    segs_.push_back(s);
  }

  // [p, +inf) or (-inf, p] with |p| > 0 mapped by t = 1/u.
  void add_tail(double p, bool positive) {
    Segment s;
    s.map = Segment::Map::InverseTanhSinh;
    if (positive) {
      s.p = 0.0;
      s.q = 1.0 / p;
    } else {
      s.p = 1.0 / p;
      s.q = 0.0;
    }
    s.xa = -kTanhSinhHalfRange;
    s.xb = kTanhSinhHalfRange;
    segs_.push_back(s);
  }

  void build_segments(double a, double b, const std::vector<SingularPoint>& points) {
    if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate: NaN limit");
    if (a == b) return;
    if (a > b) throw DomainError("integrate: lower limit exceeds upper limit");
    struct Cut {
      double at;
      bool singular;
    };
    std::vector<Cut> cuts;
    for (const auto& sp : points) {
      if (!std::isfinite(sp.at)) continue;
      if (sp.at < a || sp.at > b) continue;
      cuts.push_back({sp.at, sp.kind != PointKind::Kink});
    }
    std::sort(cuts.begin(), cuts.end(), [](const Cut& x, const Cut& y) { return x.at < y.at; });
    std::vector<Cut> uniq;
    for (const auto& c : cuts) {
      if (!uniq.empty() && uniq.back().at == c.at) {
        uniq.back().singular = uniq.back().singular || c.singular;
      } else {
        uniq.push_back(c);
      }
    }
    // Finite anchors where semi-infinite tails start.
    double lo = a, hi = b;
    bool lo_sing = false, hi_sing = false;
    std::vector<Cut> inner;
    for (const auto& c : uniq) {
      if (c.at == a) {
        lo_sing = c.singular;
      } else if (c.at == b) {
        hi_sing = c.singular;
      } else {
        inner.push_back(c);
      }
    }
    if (std::isinf(a)) {
      const double first = inner.empty() ? (std::isinf(b) ? 0.0 : b) : inner.front().at;
      const double anchor = std::min(first - 1.0, -1.0) - std::fabs(first);
      add_tail(anchor, false);
      lo = anchor;
      lo_sing = false;
    }
    if (std::isinf(b)) {
      const double last = inner.empty() ? (std::isinf(a) ? 0.0 : a) : inner.back().at;
      const double anchor = std::max(last + 1.0, 1.0) + std::fabs(last);
      hi = anchor;
      hi_sing = false;
      std::vector<Cut> pts;
      pts.push_back({lo, lo_sing});
      for (const auto& c : inner) pts.push_back(c);
      pts.push_back({hi, hi_sing});
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) add_finite(pts[i].at, pts[i + 1].at, pts[i].singular, pts[i + 1].singular);
      add_tail(anchor, true);
      return;
    }
    std::vector<Cut> pts;
    pts.push_back({lo, lo_sing});
    for (const auto& c : inner) pts.push_back(c);
    pts.push_back({hi, hi_sing});
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) add_finite(pts[i].at, pts[i + 1].at, pts[i].singular, pts[i + 1].singular);
  }

  const Integrand& f_;
  QuadratureSpec spec_;
  std::vector<Segment> segs_;
  long evals_ = 0;
  double running_val_ = 0.0;
  double running_err_ = 0.0;
};

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, const std::vector<SingularPoint>& points,
                     const QuadratureSpec& spec) {
  spec.validate();
  if (a == b) return {};
  if (a > b) {
    QuadResult r = integrate(f, b, a, points, spec);
    r.value = -r.value;
    return r;
  }
  Engine e(f, spec);
  return e.run(a, b, points);
}

double quad(const Integrand& f, double a, double b, const std::vector<SingularPoint>& points,
            const QuadratureSpec& spec) {
  return integrate(f, a, b, points, spec).value;
}

}  // namespace fracfield
