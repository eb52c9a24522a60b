#include "obsgram/wing.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "obsgram/errors.hpp"

namespace obsgram {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCmPerM = 100.0;

// Roots of 1 + cos(r) cosh(r) = 0 (clamped-free beam).
double cantilever_root(int i) {
  static constexpr std::array<double, 4> kRoots = {
      1.8751040687119611, 4.6940911329741745, 7.8547574382376126,
      10.995540734875467};
  if (i < 4) return kRoots[static_cast<std::size_t>(i)];
  return (2.0 * i + 1.0) * kPi / 2.0;
}

// Clamped-free Euler-Bernoulli shape X(s) and its first two derivatives,
// written with decaying/growing exponentials to avoid cancellation.
struct BeamShape {
  double r;       // root
  double length;  // m
  double sigma;
  double a;  // (1 + sigma) / 2
  double b;  // (1 - sigma) / 2

  BeamShape(int i, double len) : r(cantilever_root(i)), length(len) {
    const double denom = std::sinh(r) + std::sin(r);
    sigma = (std::cosh(r) + std::cos(r)) / denom;
    a = 0.5 * (1.0 + sigma);
    b = 0.5 * (std::sin(r) - std::cos(r) - std::exp(-r)) / denom;
  }

  // d^order X / ds^order.
  double eval(double s, int order) const {
    const double z = r * s / length;
    const double em = std::exp(-z) * a;
    const double ep = std::exp(z) * b;
    const double scale = std::pow(r / length, order);
    switch (order) {
      case 0:
        return em + ep - std::cos(z) + sigma * std::sin(z);
      case 1:
        return scale * (-em + ep + std::sin(z) + sigma * std::cos(z));
      default:
        return scale * (em + ep + std::cos(z) - sigma * std::sin(z));
    }
  }
};

// Composite 5-point Gauss-Legendre rule on [0, length].
struct SpanQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  SpanQuadrature(double length, int panels) {
    static constexpr std::array<double, 5> kX = {
        -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
        0.9061798459386640};
    static constexpr std::array<double, 5> kW = {
        0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
        0.4786286704993665, 0.2369268850561891};
    const double h = length / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * h;
      for (std::size_t q = 0; q < kX.size(); ++q) {
        nodes.push_back(mid + 0.5 * h * kX[q]);
        weights.push_back(0.5 * h * kW[q]);
      }
    }
  }
};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] =
        n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
  }
  return v;
}

}  // namespace

void WingParams::validate() const {
  for (double v : {chord, span, thickness, youngs_modulus, density, alpha, f1,
                   f2}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError("wing physical parameters must be positive");
    }
  }
  if (!(poisson > -1.0 && poisson < 0.5)) {
    throw ConfigError("Poisson ratio must lie in (-1, 0.5)");
  }
  if (!(beta >= 0.0)) throw ConfigError("stiffness damping beta must be >= 0");
  if (!(flap_amplitude >= 0.0)) throw ConfigError("flap amplitude must be >= 0");
  if (!std::isfinite(omega_nominal)) throw ConfigError("omega must be finite");
  if (n_bending < 1 || n_torsion < 1 || n_bending > 12 || n_torsion > 12) {
    throw ConfigError("mode counts must lie in [1, 12]");
  }
  if (grid_span_nodes < 2 || grid_chord_nodes < 2) {
    throw ConfigError("strain grid needs at least 2 x 2 nodes");
  }
  if (!(q_diagonal.array() >= 0.0).all()) {
    throw ConfigError("wing noise covariance must be >= 0");
  }
}

double ramp_envelope(double t, double period) {
  if (t < period) return 0.0;
  if (t < 2.0 * period) return (t - period) / period;
  return 1.0;
}

double ramp_envelope_rate(double t, double period) {
  return (t >= period && t < 2.0 * period) ? 1.0 / period : 0.0;
}

double flap_rate_raw(double t, const WingParams& p) {
  const double w1 = 2.0 * kPi * p.f1;
  const double w2 = 2.0 * kPi * p.f2;
  return p.flap_amplitude * (w1 * std::cos(w1 * t) + w2 / 5.0 * std::cos(w2 * t));
}

double flap_rate(double t, const WingParams& p) {
  return ramp_envelope(t, p.wingbeat_period()) * flap_rate_raw(t, p);
}

double flap_acceleration(double t, const WingParams& p) {
  const double w1 = 2.0 * kPi * p.f1;
  const double w2 = 2.0 * kPi * p.f2;
  const double raw_rate =
      -p.flap_amplitude * (w1 * w1 * std::sin(w1 * t) + w2 * w2 / 5.0 * std::sin(w2 * t));
  const double period = p.wingbeat_period();
  return ramp_envelope_rate(t, period) * flap_rate_raw(t, p) +
         ramp_envelope(t, period) * raw_rate;
}

ModeShapeTable::ModeShapeTable(std::vector<double> x_nodes,
                               std::vector<double> y_nodes,
                               std::vector<Eigen::MatrixXd> curvature,
                               Eigen::MatrixXd membrane, double half_thickness)
    : x_nodes_(std::move(x_nodes)),
      y_nodes_(std::move(y_nodes)),
      curvature_(std::move(curvature)),
      membrane_(std::move(membrane)),
      half_thickness_(half_thickness) {}

bool ModeShapeTable::contains(const Locus& l) const {
  const double tol = 1e-9;
  return l.x <= x_nodes_.front() + tol && l.x >= x_nodes_.back() - tol &&
         l.y >= y_nodes_.front() - tol && l.y <= y_nodes_.back() + tol;
}

ModeShapeTable::Cell ModeShapeTable::locate(const Locus& l) const {
  if (!contains(l) || !std::isfinite(l.x) || !std::isfinite(l.y)) {
    throw ConfigError("locus (" + std::to_string(l.x) + ", " +
                      std::to_string(l.y) + ") lies outside the wing");
  }
  const auto nx = static_cast<int>(x_nodes_.size());
  const auto ny = static_cast<int>(y_nodes_.size());
  // Fractional grid coordinates; x nodes run from the root toward the tip.
  const double gx = (l.x - x_nodes_.front()) /
                    (x_nodes_.back() - x_nodes_.front()) * (nx - 1);
  const double gy = (l.y - y_nodes_.front()) /
                    (y_nodes_.back() - y_nodes_.front()) * (ny - 1);
  Cell c;
  c.i = std::clamp(static_cast<int>(std::floor(gx)), 0, nx - 2);
  c.j = std::clamp(static_cast<int>(std::floor(gy)), 0, ny - 2);
  c.fx = std::clamp(gx - c.i, 0.0, 1.0);
  c.fy = std::clamp(gy - c.j, 0.0, 1.0);
  return c;
}

double ModeShapeTable::Cell::apply(const Eigen::MatrixXd& t) const {
  if (fx == 0.0 && fy == 0.0) return t(j, i);
  return (1.0 - fy) * ((1.0 - fx) * t(j, i) + fx * t(j, i + 1)) +
         fy * ((1.0 - fx) * t(j + 1, i) + fx * t(j + 1, i + 1));
}

Eigen::VectorXd ModeShapeTable::curvature_at(const Locus& l) const {
  const Cell cell = locate(l);
  Eigen::VectorXd out(n_modes());
  for (int m = 0; m < n_modes(); ++m) {
    out[m] = cell.apply(curvature_[static_cast<std::size_t>(m)]);
  }
  return out;
}

Eigen::VectorXd ModeShapeTable::strain_coefficients(const Locus& l) const {
  const Cell cell = locate(l);
  Eigen::VectorXd out(n_modes() + 1);
  for (int m = 0; m < n_modes(); ++m) {
    out[m] = -half_thickness_ * cell.apply(curvature_[static_cast<std::size_t>(m)]);
  }
  out[n_modes()] = cell.apply(membrane_);
  return out;
}

Eigen::VectorXd WingModel::initial_state() const {
  return Eigen::VectorXd::Zero(2 + 2 * n_modes());
}

Eigen::VectorXd WingModel::strain_features(const Eigen::VectorXd& x) const {
  const int n = n_modes();
  Eigen::VectorXd f(n + 1);
  f.head(n) = x.segment(eta_offset(), n);
  f[n] = x[0] * x[0];
  return f;
}

double WingModel::modal_energy(const Eigen::VectorXd& x) const {
  const int n = n_modes();
  const Eigen::VectorXd eta = x.segment(eta_offset(), n);
  const Eigen::VectorXd eta_dot = x.segment(eta_dot_offset(), n);
  return 0.5 * eta_dot.dot(mass * eta_dot) + 0.5 * eta.dot(stiffness * eta);
}

WingModel assemble_wing_system(const WingParams& p) {
  p.validate();
  const int nb = p.n_bending;
  const int nt = p.n_torsion;
  const int n = nb + nt;
  const double len = p.span;
  const double b = p.chord;
  const double rho_h = p.density * p.thickness;
  const double plate_d = p.youngs_modulus * std::pow(p.thickness, 3) /
                         (12.0 * (1.0 - p.poisson * p.poisson));

  // Spanwise shape of every mode (bending first, then torsion) and its
  // chordwise factor: 1 for bending, g(y) = 2y/b for torsion.
  std::vector<BeamShape> shapes;
  for (int i = 0; i < nb; ++i) shapes.emplace_back(i, len);
  for (int i = 0; i < nt; ++i) shapes.emplace_back(i, len);
  auto is_torsion = [nb](int m) { return m >= nb; };
  // Chord integrals of g_i g_j: b for bending pairs, b/3 for torsion pairs.
  auto chord_moment = [&](int i, int j) -> double {
    if (is_torsion(i) != is_torsion(j)) return 0.0;
    return is_torsion(i) ? b / 3.0 : b;
  };

  const SpanQuadrature quad(len, 400);
  const std::size_t nq = quad.nodes.size();
  Eigen::MatrixXd x0(n, static_cast<Eigen::Index>(nq));
  Eigen::MatrixXd x1(n, static_cast<Eigen::Index>(nq));
  Eigen::MatrixXd x2(n, static_cast<Eigen::Index>(nq));
  for (int m = 0; m < n; ++m) {
    for (std::size_t q = 0; q < nq; ++q) {
      const auto qq = static_cast<Eigen::Index>(q);
      x0(m, qq) = shapes[static_cast<std::size_t>(m)].eval(quad.nodes[q], 0);
      x1(m, qq) = shapes[static_cast<std::size_t>(m)].eval(quad.nodes[q], 1);
      x2(m, qq) = shapes[static_cast<std::size_t>(m)].eval(quad.nodes[q], 2);
    }
  }
  auto span_integral = [&](const Eigen::MatrixXd& f, int i,
                           const Eigen::MatrixXd& g, int j, auto&& weight) {
    double acc = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const auto qq = static_cast<Eigen::Index>(q);
      acc += quad.weights[q] * weight(quad.nodes[q]) * f(i, qq) * g(j, qq);
    }
    return acc;
  };
  auto one = [](double) { return 1.0; };

  // Mass-normalizing amplitudes.
  Eigen::VectorXd amp(n);
  for (int m = 0; m < n; ++m) {
    amp[m] = 1.0 / std::sqrt(rho_h * chord_moment(m, m) *
                             span_integral(x0, m, x0, m, one));
  }

  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd stiff = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double cm = chord_moment(i, j);
      if (cm == 0.0) continue;
      const double aa = amp[i] * amp[j];
      mass(i, j) = aa * rho_h * cm * span_integral(x0, i, x0, j, one);
      double k = cm * span_integral(x2, i, x2, j, one);
      if (is_torsion(i)) {
        // Twisting term 2 (1 - nu) w_xy^2 with w_xy = X'(s) * 2/b.
        k += 8.0 * (1.0 - p.poisson) / b * span_integral(x1, i, x1, j, one);
      }
      stiff(i, j) = aa * plate_d * k;
    }
  }
  // The spanwise shapes are orthogonal, so the normalized mass is I.
  if (!mass.isApprox(Eigen::MatrixXd::Identity(n, n), 1e-8)) {
    throw ConfigError("mode shapes failed the mass-orthogonality check");
  }
  mass = Eigen::MatrixXd::Identity(n, n);
  stiff = 0.5 * (stiff + stiff.transpose()).eval();

  Eigen::LLT<Eigen::MatrixXd> llt(stiff);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("assembled stiffness matrix is not positive definite");
  }

  Eigen::VectorXd flap_load = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd coriolis_load = Eigen::VectorXd::Zero(n);
  for (int m = 0; m < n; ++m) {
    double moment = 0.0;  // integral of s X_m(s) ds
    for (std::size_t q = 0; q < nq; ++q) {
      moment += quad.weights[q] * quad.nodes[q] * x0(m, static_cast<Eigen::Index>(q));
    }
    if (is_torsion(m)) {
      coriolis_load[m] = -2.0 * rho_h * amp[m] * (b / 3.0) * moment;
    } else {
      flap_load[m] = -rho_h * amp[m] * b * moment;
    }
  }

  // Curvature table on the strain grid (x in cm from 0 to -span).
  const std::vector<double> xs = linspace(0.0, -len * kCmPerM, p.grid_span_nodes);
  const std::vector<double> ys =
      linspace(-0.5 * b * kCmPerM, 0.5 * b * kCmPerM, p.grid_chord_nodes);
  std::vector<Eigen::MatrixXd> curvature;
  for (int m = 0; m < n; ++m) {
    Eigen::MatrixXd c(p.grid_chord_nodes, p.grid_span_nodes);
    for (int ix = 0; ix < p.grid_span_nodes; ++ix) {
      const double s = -xs[static_cast<std::size_t>(ix)] / kCmPerM;
      const double xpp = amp[m] * shapes[static_cast<std::size_t>(m)].eval(s, 2);
      for (int iy = 0; iy < p.grid_chord_nodes; ++iy) {
        const double g =
            is_torsion(m) ? 2.0 * ys[static_cast<std::size_t>(iy)] / kCmPerM / b : 1.0;
        c(iy, ix) = xpp * g;
      }
    }
    curvature.push_back(std::move(c));
  }
  // Uniaxial in-plane strain from the centrifugal load of flapping, per
  // unit phi_dot^2.
  Eigen::MatrixXd membrane(p.grid_chord_nodes, p.grid_span_nodes);
  for (int ix = 0; ix < p.grid_span_nodes; ++ix) {
    const double s = -xs[static_cast<std::size_t>(ix)] / kCmPerM;
    membrane.col(ix).setConstant(0.5 * p.density * (len * len - s * s) /
                                 p.youngs_modulus);
  }

  WingModel model{
      p,
      mass,
      stiff,
      p.alpha * mass + p.beta * stiff,
      flap_load,
      coriolis_load,
      ModeShapeTable(xs, ys, std::move(curvature), std::move(membrane),
                     0.5 * p.thickness),
      DynamicalSystem{},
  };

  DynamicalSystem& sys = model.system;
  sys.n_states = 2 + 2 * n;
  sys.n_inputs = 0;
  sys.n_outputs = n;
  sys.noise_map = Eigen::MatrixXd::Zero(sys.n_states, 2);
  sys.noise_map(0, 0) = 1.0;
  sys.noise_map(1, 1) = 1.0;
  struct Coeffs {
    WingParams params;
    Eigen::MatrixXd stiffness, damping;
    Eigen::VectorXd flap, coriolis;
  };
  auto coeffs = std::make_shared<const Coeffs>(
      Coeffs{p, model.stiffness, model.damping, model.flap_load,
             model.coriolis_load});
  sys.drift = [coeffs, n](const Eigen::VectorXd& x, const Eigen::VectorXd&,
                          double t) {
    const Coeffs& c = *coeffs;
    const double period = c.params.wingbeat_period();
    const double phi_ddot = flap_acceleration(t, c.params);
    const double phi_dot = x[0];
    const double omega = x[1];
    const auto eta = x.segment(2, n);
    const auto eta_dot = x.segment(2 + n, n);
    Eigen::VectorXd dx(x.size());
    dx[0] = phi_ddot;
    dx[1] = c.params.omega_nominal * ramp_envelope_rate(t, period);
    dx.segment(2, n) = eta_dot;
    dx.segment(2 + n, n) = -(c.stiffness * eta) - c.damping * eta_dot + phi_ddot * c.flap +
                           (omega * phi_dot) * c.coriolis;
    return dx;
  };
  sys.output_map = [n](std::span<const Eigen::VectorXd> window, double) {
    return Eigen::VectorXd(window.back().segment(2, n));
  };
  return model;
}

std::vector<double> strain_at(std::span<const Eigen::VectorXd> states,
                              const Locus& locus, const WingModel& model) {
  const Eigen::VectorXd c = model.modes.strain_coefficients(locus);
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& x : states) {
    if (x.size() != model.system.n_states) {
      throw ConfigError("state vector does not match the wing model");
    }
    out.push_back(c.dot(model.strain_features(x)));
  }
  return out;
}

DynamicalSystem wing_sensor_system(const WingModel& model,
                                   std::vector<Locus> loci,
                                   const EncoderParams& encoder, double dt) {
  if (loci.empty()) throw ConfigError("at least one sensor locus is required");
  auto enc = std::make_shared<const StrainEncoder>(encoder, dt);
  const int n = model.n_modes();
  Eigen::MatrixXd coeff(static_cast<Eigen::Index>(loci.size()), n + 1);
  for (std::size_t i = 0; i < loci.size(); ++i) {
    coeff.row(static_cast<Eigen::Index>(i)) =
        model.modes.strain_coefficients(loci[i]).transpose();
  }
  DynamicalSystem sys = model.system;
  sys.n_outputs = static_cast<int>(loci.size());
  sys.output_delay = encoder.window;
  sys.output_map = [enc, coeff, n](std::span<const Eigen::VectorXd> window,
                                   double) {
    const Eigen::Index p = coeff.rows();
    std::vector<double> history(window.size());
    Eigen::VectorXd y(p);
    for (Eigen::Index s = 0; s < p; ++s) {
      for (std::size_t k = 0; k < window.size(); ++k) {
        const Eigen::VectorXd& x = window[k];
        history[k] = coeff.row(s).head(n).dot(x.segment(2, n)) +
                     coeff(s, n) * x[0] * x[0];
      }
      y[s] = enc->fire(history);
    }
    return y;
  };
  return sys;
}

}  // namespace obsgram
