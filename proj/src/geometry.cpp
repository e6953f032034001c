#include "fracfield/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracfield/fraclap.hpp"

namespace fracfield {

namespace {

double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void require_dim(const SetDescriptor& E, const Point& x) {
  if (static_cast<int>(x.size()) != E.dim()) {
    throw DomainError("point dimension does not match the set descriptor");
  }
}

}  // namespace

SetDescriptor SetDescriptor::halfspace(Point normal, double offset) {
  if (normal.empty() || normal.size() > 3) throw DomainError("halfspace: dimension must be 1..3");
  const double n = std::sqrt(dot(normal, normal));
  if (!(n > 0.0)) throw DomainError("halfspace: zero normal");
  for (double& v : normal) v /= n;
  SetDescriptor E;
  E.kind = Kind::HalfSpace;
  E.normal = std::move(normal);
  E.offset = offset;
  return E;
}

SetDescriptor SetDescriptor::ball(Point center, double R) {
  if (center.empty() || center.size() > 3) throw DomainError("ball: dimension must be 1..3");
  if (!(R > 0.0)) throw DomainError("ball: radius must be positive");
  SetDescriptor E;
  E.kind = Kind::Ball;
  E.center = std::move(center);
  E.R = R;
  return E;
}

SetDescriptor SetDescriptor::interval_union(std::vector<std::pair<double, double>> iv) {
  if (iv.empty()) throw DomainError("interval union: no intervals");
  std::sort(iv.begin(), iv.end());
  for (std::size_t i = 0; i < iv.size(); ++i) {
    if (!(iv[i].second > iv[i].first)) throw DomainError("interval union: empty interval");
    if (i > 0 && !(iv[i].first > iv[i - 1].second)) throw DomainError("interval union: intervals must have positive gaps");
  }
  SetDescriptor E;
  E.kind = Kind::IntervalUnion;
  E.intervals = std::move(iv);
  return E;
}

int SetDescriptor::dim() const {
  switch (kind) {
    case Kind::HalfSpace: return static_cast<int>(normal.size());
    case Kind::Ball: return static_cast<int>(center.size());
    case Kind::IntervalUnion: return 1;
  }
  return 1;
}

double SetDescriptor::delta0() const {
  switch (kind) {
    case Kind::HalfSpace: return std::numeric_limits<double>::infinity();
    case Kind::Ball: return R / 5.0;
    case Kind::IntervalUnion: {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < intervals.size(); ++i) {
        m = std::min(m, intervals[i].second - intervals[i].first);
        if (i > 0) m = std::min(m, intervals[i].first - intervals[i - 1].second);
      }
      return m / 5.0;
    }
  }
  return 0.0;
}

SetDescriptor SetDescriptor::parse(const std::string& text) {
  std::istringstream is(text);
  std::string kind;
  is >> kind;
  std::vector<double> v;
  std::string tok;
  while (is >> tok) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw ConfigError("");
    } catch (...) {
      throw ConfigError("geometry: bad number '" + tok + "' in '" + text + "'");
    }
  }
  try {
    if (kind == "halfspace") {
      if (v.empty()) return halfspace({1.0}, 0.0);
      if (v.size() < 2) throw ConfigError("geometry: halfspace needs a normal and an offset");
      return halfspace(Point(v.begin(), v.end() - 1), v.back());
    }
    if (kind == "ball" || kind == "disk") {
      if (v.size() < 2) throw ConfigError("geometry: ball needs a center and a radius");
      return ball(Point(v.begin(), v.end() - 1), v.back());
    }
    if (kind == "interval") {
      if (v.empty() || v.size() % 2 != 0) throw ConfigError("geometry: interval needs endpoint pairs");
      std::vector<std::pair<double, double>> iv;
      for (std::size_t i = 0; i < v.size(); i += 2) iv.emplace_back(v[i], v[i + 1]);
      return interval_union(iv);
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("geometry: ") + e.what());
  }
  throw ConfigError("geometry: unknown kind '" + kind + "'");
}

std::string SetDescriptor::str() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::HalfSpace:
      os << "halfspace";
      for (double v : normal) os << " " << v;
      os << " " << offset;
      break;
    case Kind::Ball:
      os << "ball";
      for (double v : center) os << " " << v;
      os << " " << R;
      break;
    case Kind::IntervalUnion:
      os << "interval";
      for (const auto& [a, b] : intervals) os << " " << a << " " << b;
      break;
  }
  return os.str();
}

double signed_distance(const SetDescriptor& E, const Point& x) {
  require_dim(E, x);
  switch (E.kind) {
    case SetDescriptor::Kind::HalfSpace:
      return dot(x, E.normal) - E.offset;
    case SetDescriptor::Kind::Ball: {
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - E.center[i]) * (x[i] - E.center[i]);
      return E.R - std::sqrt(r2);
    }
    case SetDescriptor::Kind::IntervalUnion: {
      const double t = x[0];
      double best = std::numeric_limits<double>::infinity();
      bool inside = false;
      for (const auto& [a, b] : E.intervals) {
        best = std::min({best, std::fabs(t - a), std::fabs(t - b)});
        if (t > a && t < b) inside = true;
      }
      return inside ? best : -best;
    }
  }
  return 0.0;
}

Projection project_and_curvature(const SetDescriptor& E, const Point& x) {
  require_dim(E, x);
  Projection p;
  switch (E.kind) {
    case SetDescriptor::Kind::HalfSpace: {
      const double d = signed_distance(E, x);
      p.boundary = x;
      for (std::size_t i = 0; i < x.size(); ++i) p.boundary[i] -= d * E.normal[i];
      p.inward_normal = E.normal;
      p.H = 0.0;
      return p;
    }
    case SetDescriptor::Kind::Ball: {
      Point rel(x.size());
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        rel[i] = x[i] - E.center[i];
        r2 += rel[i] * rel[i];
      }
      const double r = std::sqrt(r2);
      if (!(r > 1e-12 * E.R)) throw MedialSet("projection: point at the ball centre");
      if (!(r < 2.0 * E.R)) throw DomainError("projection: point outside the tubular neighbourhood");
      p.boundary.resize(x.size());
      p.inward_normal.resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        p.boundary[i] = E.center[i] + E.R * rel[i] / r;
        p.inward_normal[i] = -rel[i] / r;
      }
      p.H = (static_cast<double>(x.size()) - 1.0) / E.R;
      return p;
    }
    case SetDescriptor::Kind::IntervalUnion: {
      const double t = x[0];
      double best = std::numeric_limits<double>::infinity(), second = best;
      double at = 0.0;
      double normal = 0.0;
      for (const auto& [a, b] : E.intervals) {
        for (int k = 0; k < 2; ++k) {
          const double e = k == 0 ? a : b;
          const double dist = std::fabs(t - e);
          if (dist < best) {
            second = best;
            best = dist;
            at = e;
            normal = k == 0 ? 1.0 : -1.0;
          } else if (dist < second) {
            second = dist;
          }
        }
      }
      const double scale = std::max(1.0, std::fabs(t));
      if (second - best <= 1e-13 * scale) throw MedialSet("projection: equidistant from two endpoints");
      p.boundary = {at};
      p.inward_normal = {normal};
      p.H = 0.0;
      return p;
    }
  }
  return p;
}

EtaSpec EtaSpec::constant(double c_plus, double c_minus, double blend_width) {
  EtaSpec e;
  e.kind = Kind::Constant;
  e.c_plus = c_plus;
  e.c_minus = c_minus;
  e.blend_width = blend_width;
  return e;
}

EtaSpec eta_optimal(const SetDescriptor& E, const FracOrder& s, double delta, double delta_prime) {
  const double d0 = E.delta0();
  if (!(delta > 0.0 && delta <= d0)) throw DomainError("eta_optimal: delta must lie in (0, delta0]");
  if (!(delta_prime > 0.0 && delta_prime < 0.5 * d0)) throw DomainError("eta_optimal: delta' must lie in (0, delta0/2)");
  EtaSpec e;
  e.kind = EtaSpec::Kind::Optimal;
  e.s = s;
  e.delta_prime = delta_prime;
  e.blend_width = 0.5 * delta_prime;
  // Sign check of the indicator's fractional Laplacian on both sides of the collar.
  if (E.dim() == 1 && E.kind == SetDescriptor::Kind::IntervalUnion) {
    for (const auto& [a, b] : E.intervals) {
      for (double x : {a + delta + delta_prime, b - delta - delta_prime, a - delta - delta_prime, b + delta + delta_prime}) {
        const double v = fraclap_indicator(E, s, {x});
        const double d = signed_distance(E, {x});
        if (v * d <= 0.0) throw SignViolation("eta_optimal: fractional Laplacian of the indicator has the wrong sign");
      }
    }
  }
  return e;
}

double eta_value(const SetDescriptor& E, const EtaSpec& eta, const Point& x) {
  const double d = signed_distance(E, x);
  if (eta.kind == EtaSpec::Kind::Constant) return d >= 0.0 ? eta.c_plus : -eta.c_minus;
  if (E.kind == SetDescriptor::Kind::HalfSpace) return d;
  const double sv = eta.s.value();
  const double v = fraclap_indicator(E, eta.s, x);
  // Far from a bounded set the value underflows; eta is then effectively infinite.
  if (v == 0.0 && std::fabs(d) > 1e3 * E.delta0()) return std::copysign(std::numeric_limits<double>::infinity(), d);
  if (v * d <= 0.0) throw SignViolation("eta: fractional Laplacian of the indicator has the wrong sign");
  const double cs = gamma_ds(1, eta.s) / sv;
  return (d > 0.0 ? 1.0 : -1.0) * std::pow(std::fabs(v) / cs, -1.0 / (2.0 * sv));
}

EtaBounds eta_collar_bounds(const SetDescriptor& E, const EtaSpec& eta, double delta, int samples) {
  EtaBounds b{std::numeric_limits<double>::infinity(), 0.0};
  const double width = eta.kind == EtaSpec::Kind::Optimal ? eta.delta_prime : eta.blend_width;
  auto visit = [&](const Point& x) {
    const double v = std::fabs(beta_modified(E, eta, delta, x));
    b.c1 = std::min(b.c1, v);
    b.c2 = std::max(b.c2, v);
  };
  for (int i = 0; i <= samples; ++i) {
    const double t = delta + width * i / samples;
    for (double sg : {1.0, -1.0}) {
      const double d = sg * t;
      switch (E.kind) {
        case SetDescriptor::Kind::HalfSpace: {
          Point x(E.normal.size());
          for (std::size_t k = 0; k < x.size(); ++k) x[k] = (E.offset + d) * E.normal[k];
          visit(x);
          break;
        }
        case SetDescriptor::Kind::Ball: {
          Point x = E.center;
          x[0] += E.R - d;
          visit(x);
          break;
        }
        case SetDescriptor::Kind::IntervalUnion:
          for (const auto& [a, bb] : E.intervals) {
            visit({a + d});
            visit({bb - d});
          }
          break;
      }
    }
  }
  return b;
}

void validate_eta(const SetDescriptor& E, const EtaSpec& eta, double delta) {
  if (!(delta > 0.0 && delta <= E.delta0())) throw DomainError("modified distance: delta must lie in (0, delta0]");
  if (!(eta.blend_width > 0.0)) throw InvalidEta("eta: blend width must be positive");
  if (eta.kind == EtaSpec::Kind::Constant) {
    if (!(eta.c_plus > 0.0 && eta.c_minus > 0.0)) throw InvalidEta("eta: constants must be positive");
    // The blend is monotone in the distance only when the target sits beyond the blend.
    if (eta.c_plus < delta + eta.blend_width || eta.c_minus < delta + eta.blend_width) {
      throw InvalidEta("eta: constant target must be at least delta + blend width");
    }
  } else if (!(eta.delta_prime > 0.0)) {
    throw InvalidEta("eta: optimal target needs delta' > 0");
  }
}

double smoothstep5(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double beta_modified(const SetDescriptor& E, const EtaSpec& eta, double delta, const Point& x) {
  const double d = signed_distance(E, x);
  const double ad = std::fabs(d);
  if (ad <= delta) return d;
  const double phi = smoothstep5((ad - delta) / eta.blend_width);
  const double target = eta_value(E, eta, x);
  if (target * d <= 0.0) throw InvalidEta("eta: sign differs from the signed distance");
  return (1.0 - phi) * d + phi * target;
}

}  // namespace fracfield
