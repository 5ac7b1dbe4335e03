#include "orbitinv/helmholtz.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <istream>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fft.hpp"
#include "orbitinv/number_format.hpp"

namespace orbitinv {

const char* to_string(BoundaryMode mode) {
  return mode == BoundaryMode::Periodic ? "periodic" : "dirichlet-zero";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
  if (s == "periodic") return BoundaryMode::Periodic;
  if (s == "dirichlet-zero" || s == "dirichlet") return BoundaryMode::DirichletZero;
  throw std::invalid_argument("unknown boundary mode '" + s + "'");
}

GridGeometry GridGeometry::periodic_box(std::size_t nx, std::size_t ny, double xmin, double xmax,
                                        double ymin, double ymax) {
  GridGeometry g{nx, ny, xmin, ymin, (xmax - xmin) / static_cast<double>(nx),
                 (ymax - ymin) / static_cast<double>(ny)};
  g.validate();
  return g;
}

GridGeometry GridGeometry::closed_box(std::size_t nx, std::size_t ny, double xmin, double xmax,
                                      double ymin, double ymax) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("GridGeometry: need at least 2 nodes per axis");
  GridGeometry g{nx, ny, xmin, ymin, (xmax - xmin) / static_cast<double>(nx - 1),
                 (ymax - ymin) / static_cast<double>(ny - 1)};
  g.validate();
  return g;
}

void GridGeometry::validate() const {
  if (nx < 8 || ny < 8) throw std::invalid_argument("grid needs at least 8 nodes per axis");
  if (!(hx > 0.0) || !(hy > 0.0) || !std::isfinite(hx) || !std::isfinite(hy)) {
    throw std::invalid_argument("grid spacing must be positive and finite");
  }
}

double GridScalar::mean() const {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

void GridField::validate() const {
  geom.validate();
  if (fx.size() != geom.size() || fy.size() != geom.size()) {
    throw std::invalid_argument("grid field sample count does not match geometry");
  }
  for (std::size_t k = 0; k < fx.size(); ++k) {
    if (!std::isfinite(fx[k]) || !std::isfinite(fy[k])) {
      throw std::invalid_argument("grid field contains non-finite samples");
    }
  }
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

enum class Axis { X, Y };

std::vector<double> fd_derivative(const std::vector<double>& v, const GridGeometry& g, Axis axis,
                                  BoundaryMode mode) {
  std::vector<double> out(v.size());
  const std::size_t n = axis == Axis::X ? g.nx : g.ny;
  const double h = axis == Axis::X ? g.hx : g.hy;
  auto idx = [&](std::size_t line, std::size_t k) {
    return axis == Axis::X ? g.index(k, line) : g.index(line, k);
  };
  const std::size_t lines = axis == Axis::X ? g.ny : g.nx;
  for (std::size_t line = 0; line < lines; ++line) {
    for (std::size_t k = 0; k < n; ++k) {
      double d;
      if (k > 0 && k + 1 < n) {
        d = (v[idx(line, k + 1)] - v[idx(line, k - 1)]) / (2.0 * h);
      } else if (mode == BoundaryMode::Periodic) {
        const std::size_t kp = (k + 1) % n;
        const std::size_t km = (k + n - 1) % n;
        d = (v[idx(line, kp)] - v[idx(line, km)]) / (2.0 * h);
      } else if (k == 0) {
        d = (-3.0 * v[idx(line, 0)] + 4.0 * v[idx(line, 1)] - v[idx(line, 2)]) / (2.0 * h);
      } else {
        d = (3.0 * v[idx(line, n - 1)] - 4.0 * v[idx(line, n - 2)] + v[idx(line, n - 3)]) / (2.0 * h);
      }
      out[idx(line, k)] = d;
    }
  }
  return out;
}

// Fourier differentiation on a periodic grid; Nyquist modes of odd
// derivatives are dropped.
class Spectral {
 public:
  explicit Spectral(const GridGeometry& g) : g_(g), fft_(g.ny, g.nx) {}

  double kx(std::size_t i, bool odd) const {
    if (odd && g_.nx % 2 == 0 && i == g_.nx / 2) return 0.0;
    return 2.0 * std::numbers::pi * static_cast<double>(i) / (static_cast<double>(g_.nx) * g_.hx);
  }
  double ky(std::size_t j, bool odd) const {
    if (odd && g_.ny % 2 == 0 && j == g_.ny / 2) return 0.0;
    const double jj = j <= g_.ny / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(g_.ny);
    return 2.0 * std::numbers::pi * jj / (static_cast<double>(g_.ny) * g_.hy);
  }
  std::size_t half() const { return g_.nx / 2 + 1; }

  std::vector<std::complex<double>> forward(const std::vector<double>& v) { return fft_.forward(v); }
  std::vector<double> inverse(const std::vector<std::complex<double>>& s) { return fft_.inverse(s); }

  std::vector<double> derivative(const std::vector<double>& v, Axis axis) {
    auto s = forward(v);
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t j = 0; j < g_.ny; ++j) {
      for (std::size_t i = 0; i < half(); ++i) {
        const double k = axis == Axis::X ? kx(i, true) : ky(j, true);
        s[j * half() + i] *= I * k;
      }
    }
    return inverse(s);
  }

 private:
  GridGeometry g_;
  detail::RealFft fft_;
};

std::vector<double> derivative(const std::vector<double>& v, const GridGeometry& g, Axis axis,
                               BoundaryMode mode) {
  if (mode == BoundaryMode::Periodic) {
    Spectral sp(g);
    return sp.derivative(v, axis);
  }
  return fd_derivative(v, g, axis, mode);
}

double l2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * a[k] + b[k] * b[k];
  return std::sqrt(s);
}

}  // namespace

GridScalar divergence(const GridField& f, BoundaryMode mode) {
  f.validate();
  GridScalar out(f.geom);
  const auto dx = fd_derivative(f.fx, f.geom, Axis::X, mode);
  const auto dy = fd_derivative(f.fy, f.geom, Axis::Y, mode);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = dx[k] + dy[k];
  return out;
}

GridScalar curl_z(const GridField& f, BoundaryMode mode) {
  f.validate();
  GridScalar out(f.geom);
  const auto dfy_dx = fd_derivative(f.fy, f.geom, Axis::X, mode);
  const auto dfx_dy = fd_derivative(f.fx, f.geom, Axis::Y, mode);
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = dfy_dx[k] - dfx_dy[k];
  return out;
}

// ---------------------------------------------------------------------------
// Poisson

PoissonNotConverged::PoissonNotConverged(double achieved, std::size_t sweeps)
    : std::runtime_error("SOR did not converge: relative residual " + fmt17(achieved) + " after " +
                         std::to_string(sweeps) + " sweeps"),
      achieved_(achieved) {}

namespace {

PoissonSolution solve_periodic(const GridScalar& rhs) {
  const GridGeometry& g = rhs.geom;
  PoissonSolution sol{GridScalar(g)};
  sol.removed_mean = rhs.mean();
  Spectral sp(g);
  auto s = sp.forward(rhs.values);
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < sp.half(); ++i) {
      const double kx = sp.kx(i, false);
      const double ky = sp.ky(j, false);
      const double k2 = kx * kx + ky * ky;
      auto& c = s[j * sp.half() + i];
      c = k2 == 0.0 ? std::complex<double>(0.0) : c / -k2;
    }
  }
  sol.u.values = sp.inverse(s);
  return sol;
}

double interior_residual(const GridScalar& u, const GridScalar& f, double& fnorm) {
  const GridGeometry& g = u.geom;
  const double ax = 1.0 / (g.hx * g.hx);
  const double ay = 1.0 / (g.hy * g.hy);
  double rr = 0.0;
  fnorm = 0.0;
  for (std::size_t j = 1; j + 1 < g.ny; ++j) {
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
      const double lap = ax * (u.at(i + 1, j) - 2.0 * u.at(i, j) + u.at(i - 1, j)) +
                         ay * (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1));
      const double r = f.at(i, j) - lap;
      rr += r * r;
      fnorm += f.at(i, j) * f.at(i, j);
    }
  }
  fnorm = std::sqrt(fnorm);
  return std::sqrt(rr);
}

PoissonSolution solve_dirichlet(const GridScalar& rhs) {
  const GridGeometry& g = rhs.geom;
  PoissonSolution sol{GridScalar(g)};
  GridScalar& u = sol.u;
  double fnorm = 0.0;
  interior_residual(u, rhs, fnorm);
  if (fnorm == 0.0) return sol;

  const double ax = 1.0 / (g.hx * g.hx);
  const double ay = 1.0 / (g.hy * g.hy);
  const double diag = 2.0 * (ax + ay);
  // Optimal relaxation for the model problem on this rectangle.
  const double rho = (ax * std::cos(std::numbers::pi / static_cast<double>(g.nx - 1)) +
                      ay * std::cos(std::numbers::pi / static_cast<double>(g.ny - 1))) /
                     (ax + ay);
  const double omega = 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));

  constexpr std::size_t kMaxSweeps = 100000;
  constexpr double kTarget = 1e-10;
  double rel = 1.0;
  for (std::size_t sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    for (int colour = 0; colour < 2; ++colour) {
      for (std::size_t j = 1; j + 1 < g.ny; ++j) {
        for (std::size_t i = 1 + ((j + colour) & 1); i + 1 < g.nx; i += 2) {
          const double gs = (ax * (u.at(i + 1, j) + u.at(i - 1, j)) +
                             ay * (u.at(i, j + 1) + u.at(i, j - 1)) - rhs.at(i, j)) /
                            diag;
          u.at(i, j) += omega * (gs - u.at(i, j));
        }
      }
    }
    if (sweep % 5 == 0 || sweep == kMaxSweeps) {
      rel = interior_residual(u, rhs, fnorm) / fnorm;
      sol.sweeps = sweep;
      if (rel <= kTarget) {
        sol.residual = rel;
        return sol;
      }
    }
  }
  throw PoissonNotConverged(rel, kMaxSweeps);
}

}  // namespace

PoissonSolution solve_poisson(const GridScalar& rhs, BoundaryMode mode) {
  rhs.geom.validate();
  for (double v : rhs.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("solve_poisson: non-finite right-hand side");
  }
  return mode == BoundaryMode::Periodic ? solve_periodic(rhs) : solve_dirichlet(rhs);
}

// ---------------------------------------------------------------------------
// Decomposition

GridField gradient_part(const GridScalar& potential, BoundaryMode mode) {
  GridField out(potential.geom);
  const auto ux = derivative(potential.values, potential.geom, Axis::X, mode);
  const auto uy = derivative(potential.values, potential.geom, Axis::Y, mode);
  for (std::size_t k = 0; k < ux.size(); ++k) {
    out.fx[k] = -ux[k];
    out.fy[k] = -uy[k];
  }
  return out;
}

GridField rotational_part(const GridScalar& stream, BoundaryMode mode) {
  GridField out(stream.geom);
  const auto px = derivative(stream.values, stream.geom, Axis::X, mode);
  const auto py = derivative(stream.values, stream.geom, Axis::Y, mode);
  for (std::size_t k = 0; k < px.size(); ++k) {
    out.fx[k] = py[k];
    out.fy[k] = -px[k];
  }
  return out;
}

DecompositionResult decompose(const GridField& f, BoundaryMode mode) {
  f.validate();
  const GridGeometry& g = f.geom;

  GridScalar neg_div(g), neg_curl(g);
  {
    const auto dfx_dx = derivative(f.fx, g, Axis::X, mode);
    const auto dfy_dy = derivative(f.fy, g, Axis::Y, mode);
    const auto dfy_dx = derivative(f.fy, g, Axis::X, mode);
    const auto dfx_dy = derivative(f.fx, g, Axis::Y, mode);
    for (std::size_t k = 0; k < g.size(); ++k) {
      neg_div.values[k] = -(dfx_dx[k] + dfy_dy[k]);
      neg_curl.values[k] = -(dfy_dx[k] - dfx_dy[k]);
    }
  }

  DecompositionResult res{solve_poisson(neg_div, mode).u, solve_poisson(neg_curl, mode).u, 0.0, mode, {}};

  const GridField grad_part = gradient_part(res.potential, mode);
  const GridField rot_part = rotational_part(res.stream, mode);
  std::vector<double> ex(g.size()), ey(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    ex[k] = f.fx[k] - grad_part.fx[k] - rot_part.fx[k];
    ey[k] = f.fy[k] - grad_part.fy[k] - rot_part.fy[k];
  }
  const double norm = l2(f.fx, f.fy);
  res.residual = norm == 0.0 ? 0.0 : l2(ex, ey) / norm;

  if (mode == BoundaryMode::Periodic && res.residual > 1e-6) {
    res.warnings.push_back(
        "field has a mean (harmonic) component that neither potential can represent on a periodic grid");
  }
  if (mode == BoundaryMode::DirichletZero && res.residual > 1e-3) {
    res.warnings.push_back("dirichlet-zero decomposition is approximate: residual concentrates at the boundary");
  }
  return res;
}

GridField compose(const SystemSpec& spec, const GridGeometry& geom) {
  geom.validate();
  GridField out(geom);
  for (std::size_t j = 0; j < geom.ny; ++j) {
    for (std::size_t i = 0; i < geom.nx; ++i) {
      const Force fr = force(spec, geom.x(i), geom.y(j));
      out.fx[geom.index(i, j)] = fr.fx;
      out.fy[geom.index(i, j)] = fr.fy;
    }
  }
  return out;
}

GridField compose(const ScalarField& potential, const ScalarField& stream, const GridGeometry& geom) {
  return compose(SystemSpec("composed", potential, stream), geom);
}

GridScalar sample(const ScalarField& f, const GridGeometry& geom) {
  GridScalar out(geom);
  for (std::size_t j = 0; j < geom.ny; ++j) {
    for (std::size_t i = 0; i < geom.nx; ++i) out.at(i, j) = f(geom.x(i), geom.y(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool to_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  while (*begin == ' ' || *begin == '\t') ++begin;
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0' && std::isfinite(out);
}

}  // namespace

GridField read_grid_field_csv(std::istream& is) {
  std::string line;
  std::optional<GridGeometry> header;
  std::vector<std::array<double, 4>> rows;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      if (header || !rows.empty()) throw GridFormatError("line " + std::to_string(line_no) + ": unexpected header");
      try {
        const auto j = nlohmann::json::parse(line.substr(1));
        header = GridGeometry{j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>(),
                              j.at("x0").get<double>(),      j.at("y0").get<double>(),
                              j.at("hx").get<double>(),      j.at("hy").get<double>()};
      } catch (const nlohmann::json::exception& e) {
        throw GridFormatError("line " + std::to_string(line_no) + ": bad geometry header: " + e.what());
      }
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 4) {
      throw GridFormatError("line " + std::to_string(line_no) + ": expected 4 columns, found " +
                            std::to_string(cells.size()));
    }
    std::array<double, 4> row{};
    bool numeric = true;
    for (int k = 0; k < 4; ++k) numeric = numeric && to_double(cells[k], row[k]);
    if (!numeric) {
      if (rows.empty() && cells[0] == "x") continue;  // column names
      throw GridFormatError("line " + std::to_string(line_no) + ": non-numeric value");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw GridFormatError("no grid rows");

  GridGeometry g;
  if (header) {
    g = *header;
  } else {
    std::size_t nx = 1;
    while (nx < rows.size() && rows[nx][1] == rows[0][1]) ++nx;
    if (nx < 2 || rows.size() % nx != 0) throw GridFormatError("ragged grid: rows do not form a rectangle");
    const std::size_t ny = rows.size() / nx;
    if (ny < 2) throw GridFormatError("grid needs at least two rows of nodes");
    g = GridGeometry{nx, ny, rows[0][0], rows[0][1], rows[1][0] - rows[0][0], rows[nx][1] - rows[0][1]};
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw GridFormatError(e.what());
  }
  if (rows.size() != g.size()) {
    throw GridFormatError("expected " + std::to_string(g.size()) + " rows, found " + std::to_string(rows.size()));
  }

  GridField f(g);
  const double tol = 1e-9 * std::max({1.0, std::abs(g.x0), std::abs(g.y0),
                                      g.hx * static_cast<double>(g.nx), g.hy * static_cast<double>(g.ny)});
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const auto& r = rows[g.index(i, j)];
      if (std::abs(r[0] - g.x(i)) > tol || std::abs(r[1] - g.y(j)) > tol) {
        throw GridFormatError("node (" + std::to_string(i) + "," + std::to_string(j) +
                              ") is off the uniform grid");
      }
      f.fx[g.index(i, j)] = r[2];
      f.fy[g.index(i, j)] = r[3];
    }
  }
  return f;
}

namespace {

void write_header(std::ostream& os, const GridGeometry& g) {
  os << "# {\"nx\":" << g.nx << ",\"ny\":" << g.ny << ",\"x0\":" << fmt17(g.x0)
     << ",\"y0\":" << fmt17(g.y0) << ",\"hx\":" << fmt17(g.hx) << ",\"hy\":" << fmt17(g.hy) << "}\n";
}

}  // namespace

void write_grid_field_csv(std::ostream& os, const GridField& f, bool with_header) {
  if (with_header) write_header(os, f.geom);
  os << "x,y,Fx,Fy\n";
  const GridGeometry& g = f.geom;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      os << fmt17(g.x(i)) << ',' << fmt17(g.y(j)) << ',' << fmt17(f.fx[g.index(i, j)]) << ','
         << fmt17(f.fy[g.index(i, j)]) << '\n';
    }
  }
}

void write_grid_scalar_csv(std::ostream& os, const GridScalar& s, const std::string& column) {
  write_header(os, s.geom);
  os << "x,y," << column << '\n';
  const GridGeometry& g = s.geom;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      os << fmt17(g.x(i)) << ',' << fmt17(g.y(j)) << ',' << fmt17(s.at(i, j)) << '\n';
    }
  }
}

}  // namespace orbitinv
