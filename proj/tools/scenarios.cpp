#include "scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "krein/bridge.hpp"
#include "krein/hki.hpp"
#include "krein/io.hpp"
#include "krein/kdv5.hpp"
#include "krein/krein_matrix.hpp"
#include "krein/pencil.hpp"
#include "krein/spectrum.hpp"
#include "krein/subspace.hpp"
#include "krein/svg.hpp"

namespace kreintool {

using namespace krein;

namespace {

constexpr double kPi = 3.14159265358979323846;

const char* kPalette[] = {"#1f6feb", "#d1242f", "#1a7f37", "#9a6700",
                          "#8250df", "#bf3989", "#57606a"};

// ---------------------------------------------------------------------------
// parameter handling

struct ParamSpec {
  std::string key;
  std::string default_value;  ///< rendered in help; empty string = optional/none
  std::string doc;
};

class Params {
 public:
  Params(const std::map<std::string, std::string>& given, const std::vector<ParamSpec>& specs)
      : given_(given) {
    std::set<std::string> allowed;
    for (const ParamSpec& s : specs) allowed.insert(s.key);
    for (const auto& [k, v] : given) {
      if (!allowed.count(k)) {
        std::ostringstream msg;
        msg << "unknown parameter --" << k << "; allowed:";
        for (const ParamSpec& s : specs) msg << " --" << s.key;
        throw ConfigInvalid(msg.str());
      }
    }
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = given_.find(key);
    return it == given_.end() ? fallback : it->second;
  }
  double num(const std::string& key, double fallback) const {
    auto it = given_.find(key);
    if (it == given_.end()) return fallback;
    try {
      size_t used = 0;
      const double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigInvalid("parameter --" + key + " expects a number, got '" + it->second + "'");
    }
  }
  int integer(const std::string& key, int fallback) const {
    const double v = num(key, fallback);
    if (v != std::floor(v)) throw ConfigInvalid("parameter --" + key + " expects an integer");
    return static_cast<int>(v);
  }

 private:
  const std::map<std::string, std::string>& given_;
};

std::vector<int> parse_ks(const std::string& text) {
  std::vector<int> ks;
  if (text.empty() || text == "none") return ks;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument("trailing");
      ks.push_back(v);
    } catch (const std::exception&) {
      throw ConfigInvalid("parameter --ks expects comma-separated integers, got '" + text + "'");
    }
  }
  return ks;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2) throw ConfigInvalid("grids need at least 2 points");
  std::vector<double> out(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  return out;
}

// ---------------------------------------------------------------------------
// artifact writing

struct Sink {
  std::filesystem::path dir;
  std::vector<std::string> names;
  void write(const std::string& name, const std::string& text) {
    io::write_text(dir / name, text);
    names.push_back(name);
  }
};

svg::Figure base_figure(const std::string& title, const std::string& xlabel,
                        const std::string& ylabel) {
  svg::Figure fig;
  fig.title = title;
  fig.xlabel = xlabel;
  fig.ylabel = ylabel;
  return fig;
}

/// Scatter of a computed spectrum in the complex plane.  Band-tagged points
/// are grayed, negative-signature imaginary points are red, the rest blue;
/// optional red crosses mark the analytic essential-band edges.
svg::Figure spectrum_figure(const SpectrumReport& rep, const std::string& title,
                            const std::vector<double>& band_edges) {
  svg::Figure fig = base_figure(title, "Re lambda", "Im lambda");
  bool labeled_band = false, labeled_neg = false, labeled_pt = false;
  for (const PolyEigenvalue& pe : rep.eigenvalues) {
    svg::Marker m;
    m.x = pe.lambda.real();
    m.y = pe.lambda.imag();
    m.shape = svg::MarkerShape::Circle;
    if (pe.essential_band) {
      m.color = "#8c959f";
      if (!labeled_band) {
        m.label = "essential band";
        labeled_band = true;
      }
    } else if (pe.krein_index && *pe.krein_index > 0) {
      m.color = "#d1242f";
      if (!labeled_neg) {
        m.label = "negative signature";
        labeled_neg = true;
      }
    } else {
      m.color = "#1f6feb";
      if (!labeled_pt) {
        m.label = "point spectrum";
        labeled_pt = true;
      }
    }
    fig.markers.push_back(std::move(m));
  }
  bool labeled_edge = false;
  for (double e : band_edges) {
    svg::Marker m;
    m.x = 0;
    m.y = e;
    m.shape = svg::MarkerShape::Cross;
    m.color = "#d1242f";
    if (!labeled_edge) {
      m.label = "band edge";
      labeled_edge = true;
    }
    fig.markers.push_back(std::move(m));
  }
  return fig;
}

/// Branch curves with zero/pole markers; zeros are red when the slope there
/// encodes negative signature, green otherwise; poles are orange squares.
void add_curves(svg::Figure& fig, const KreinCurveSet& curves) {
  for (int j = 0; j < curves.n_branches(); ++j) {
    svg::Series s;
    s.color = kPalette[j % 7];
    s.label = "r_" + std::to_string(j + 1);
    const auto& br = curves.branches[static_cast<size_t>(j)];
    for (size_t i = 0; i < curves.grid.size(); ++i) {
      s.x.push_back(curves.grid[i]);
      s.y.push_back(curves.valid[i] ? br[i] : std::nan(""));
    }
    fig.series.push_back(std::move(s));
  }
  bool labeled_zero = false, labeled_pole = false;
  for (const KreinZero& z : curves.zeros) {
    svg::Marker m;
    m.x = z.z;
    m.y = 0;
    m.shape = svg::MarkerShape::Circle;
    m.color = z.signature > 0 ? "#d1242f" : "#1a7f37";
    if (!labeled_zero) {
      m.label = "zero";
      labeled_zero = true;
    }
    fig.markers.push_back(std::move(m));
  }
  for (const KreinPole& p : curves.poles) {
    svg::Marker m;
    m.x = p.z;
    m.y = 0;
    m.shape = svg::MarkerShape::Square;
    m.color = "#9a6700";
    if (!labeled_pole) {
      m.label = "pole";
      labeled_pole = true;
    }
    fig.markers.push_back(std::move(m));
  }
}

// ---------------------------------------------------------------------------
// scenarios

void run_core_demo(const Params& p, Sink& sink, const Tolerances& tol) {
  StarEvenPencil pencil;
  const std::string path = p.str("pencil", "");
  if (path.empty()) {
    // Built-in demo: A_0 = diag(-1, 1) Hermitian with one negative direction,
    // A_1 the canonical skew form; the spectrum is the real pair +-1.
    Matrix a0(2, 2), a1(2, 2);
    a0 << -1, 0, 0, 1;
    a1 << 0, 1, -1, 0;
    pencil = validate_pencil({a0, a1});
  } else {
    pencil = validate_pencil(io::pencil_from_json(io::read_text(path)).coeffs, tol);
  }
  sink.write("pencil.json", io::pencil_to_json(pencil));
  const SpectrumReport rep = polynomial_spectrum(pencil, tol);
  sink.write("spectrum.json", io::spectrum_to_json(rep));
  sink.write("spectrum.csv", io::spectrum_to_csv(rep));
  sink.write("spectrum.svg", svg::render(spectrum_figure(rep, "Polynomial spectrum", {})));
}

void run_kdv5_dispersion(const Params& p, Sink& sink) {
  const Kdv5Params params = Kdv5Params::with_b(p.num("b", -8.0 / 15.0));
  validate_params(params);
  const double mu_min = p.num("mu-min", 0.0);
  const double mu_max = p.num("mu-max", 0.5);
  const int points = p.integer("points", 501);
  const int n_min = p.integer("n-min", -3);
  const int n_max = p.integer("n-max", 3);
  if (n_min > n_max) throw ConfigInvalid("--n-min must not exceed --n-max");
  const std::vector<double> mu = linspace(mu_min, mu_max, points);
  const std::vector<DispersionCurve> curves = dispersion_curves(mu, n_min, n_max, params);
  const std::vector<CollisionPrediction> collisions =
      predict_collisions(params, n_min, n_max, mu_min + 1e-9, mu_max);
  sink.write("dispersion.csv", io::dispersion_to_csv(curves));
  sink.write("collisions.csv", io::collisions_to_csv(collisions));

  svg::Figure fig = base_figure("Dispersion curves", "mu", "z");
  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const DispersionCurve& c = curves[ci];
    svg::Series solid, dashed;
    solid.color = dashed.color = kPalette[ci % 7];
    dashed.dashed = true;
    solid.label = "z(" + std::to_string(c.n) + ")";
    for (const DispersionPoint& pt : c.points) {
      solid.x.push_back(pt.mu);
      dashed.x.push_back(pt.mu);
      solid.y.push_back(pt.negative_signature ? std::nan("") : pt.z);
      dashed.y.push_back(pt.negative_signature ? pt.z : std::nan(""));
    }
    fig.series.push_back(std::move(solid));
    fig.series.push_back(std::move(dashed));
  }
  bool labeled = false;
  for (const CollisionPrediction& c : collisions) {
    svg::Marker m;
    m.x = c.mu;
    m.y = c.z;
    m.color = "#d1242f";
    if (!labeled) {
      m.label = "opposite-signature collision";
      labeled = true;
    }
    fig.markers.push_back(std::move(m));
  }
  sink.write("dispersion.svg", svg::render(fig));
}

PeriodicWave solve_wave(const Params& p, Kdv5Params& params) {
  params = Kdv5Params::with_b(p.num("b", -8.0 / 15.0));
  params.modes = p.integer("modes", 32);
  validate_params(params);
  return solve_periodic_wave(params, p.num("amplitude", 2.3e-2));
}

void run_kdv5_wave(const Params& p, Sink& sink) {
  Kdv5Params params;
  const PeriodicWave wave = solve_wave(p, params);
  sink.write("wave.json", io::wave_to_json(wave));

  std::ostringstream csv;
  csv << "y,u\n";
  svg::Series s;
  const int samples = 401;
  for (int i = 0; i < samples; ++i) {
    const double y = 2.0 * kPi * i / (samples - 1);
    double u = wave.coeffs(0);
    for (int k = 1; k <= wave.modes(); ++k) u += 2.0 * wave.coeffs(k) * std::cos(k * y);
    csv << io::format_full(y) << ',' << io::format_full(u) << '\n';
    s.x.push_back(y);
    s.y.push_back(u);
  }
  sink.write("wave_profile.csv", csv.str());
  svg::Figure fig = base_figure("Periodic wave profile", "y", "u");
  fig.series.push_back(std::move(s));
  sink.write("wave.svg", svg::render(fig));
}

void run_kdv5_scan(const Params& p, Sink& sink, const Tolerances& tol) {
  Kdv5Params params;
  const PeriodicWave wave = solve_wave(p, params);
  const double mu_min = p.num("mu-min", 0.15);
  const double mu_max = p.num("mu-max", 0.45);
  const int points = p.integer("points", 400);
  const bool refine = p.integer("refine", 1) != 0;
  if (!(mu_min > 0.0)) throw ConfigInvalid("--mu-min must be positive (A_1 is singular at mu = 0)");
  const BlochScan scan =
      bloch_scan(wave, linspace(mu_min, mu_max, points), params, tol.unstable);
  sink.write("scan.csv", io::scan_to_csv(scan));

  std::vector<BubbleInterval> bubbles = scan.bubbles;
  if (refine) {
    bubbles.clear();
    for (const CollisionPrediction& c :
         predict_collisions(params, -3, 3, mu_min, mu_max)) {
      const BubbleInterval b = refine_bubble(wave, params, c.mu, 5e-3, tol.unstable);
      if (b.found) bubbles.push_back(b);
    }
  }
  std::ostringstream bj;
  bj << "{\n  \"bubbles\": [";
  for (size_t i = 0; i < bubbles.size(); ++i) {
    const BubbleInterval& b = bubbles[i];
    bj << (i ? ",\n    {" : "\n    {") << "\"mu_lo\": \"" << io::format_full(b.mu_lo)
       << "\", \"mu_hi\": \"" << io::format_full(b.mu_hi) << "\", \"peak_mu\": \""
       << io::format_full(b.peak_mu) << "\", \"peak_re\": \"" << io::format_full(b.peak_re)
       << "\"}";
  }
  bj << (bubbles.empty() ? "]\n}\n" : "\n  ]\n}\n");
  sink.write("bubbles.json", bj.str());

  svg::Figure fig = base_figure("Bloch growth-rate scan", "mu", "max Re lambda");
  svg::Series s;
  s.label = "max Re lambda";
  for (const BlochSample& smp : scan.samples) {
    s.x.push_back(smp.mu);
    s.y.push_back(smp.max_re);
  }
  fig.series.push_back(std::move(s));
  bool labeled = false;
  for (const BubbleInterval& b : bubbles) {
    svg::Marker m;
    m.x = b.peak_mu;
    m.y = b.peak_re;
    m.color = "#d1242f";
    if (!labeled) {
      m.label = "bubble peak";
      labeled = true;
    }
    fig.markers.push_back(std::move(m));
  }
  svg::Figure idx = base_figure("", "mu", "n(A_0)");
  idx.height = 220;
  svg::Series si;
  si.color = "#1a7f37";
  for (const BlochSample& smp : scan.samples) {
    si.x.push_back(smp.mu);
    si.y.push_back(smp.n_a0);
  }
  idx.series.push_back(std::move(si));
  sink.write("scan.svg", svg::render_panels({fig, idx}));
}

void run_kdv5_krein(const Params& p, Sink& sink, const Tolerances& tol) {
  Kdv5Params params;
  const PeriodicWave wave = solve_wave(p, params);
  const double mu = p.num("mu", 0.3675);
  const double z_min = p.num("z-min", -0.155);
  const double z_max = p.num("z-max", -0.085);
  const int points = p.integer("points", 701);
  if (!(z_min < z_max)) throw ConfigInvalid("--z-min must be below --z-max");
  const KreinCurveSet curves = kdv5_krein_curves(wave, mu, params, z_min, z_max, points, tol);
  sink.write("krein_curves.csv", io::curves_to_csv(curves));
  sink.write("krein_curves.json", io::curves_to_json(curves));

  svg::Figure full = base_figure("Krein eigenvalue branches", "z", "r_j(z)");
  add_curves(full, curves);
  // Zoom panel around the located zeros (window centre when there are none).
  double centre = (z_min + z_max) / 2, spread = (z_max - z_min) / 16;
  if (!curves.zeros.empty()) {
    double lo = curves.zeros.front().z, hi = lo;
    for (const KreinZero& z : curves.zeros) {
      lo = std::min(lo, z.z);
      hi = std::max(hi, z.z);
    }
    centre = (lo + hi) / 2;
    spread = std::max((hi - lo) * 1.5, (z_max - z_min) / 50);
  }
  svg::Figure zoom = base_figure("Zoom near the zeros", "z", "r_j(z)");
  add_curves(zoom, curves);
  zoom.x_bounds = svg::AxisBounds{centre - spread, centre + spread};
  double ymax = 0.0;
  for (int j = 0; j < curves.n_branches(); ++j)
    for (size_t i = 0; i < curves.grid.size(); ++i)
      if (curves.valid[i] && std::abs(curves.grid[i] - centre) <= spread)
        ymax = std::max(ymax, std::abs(curves.branches[static_cast<size_t>(j)][i]));
  if (ymax > 0) zoom.y_bounds = svg::AxisBounds{-1.2 * ymax, 1.2 * ymax};
  sink.write("krein.svg", svg::render_panels({full, zoom}));
}

BridgeGrid grid_from(const Params& p) {
  BridgeGrid grid;
  grid.n = p.integer("n", 512);
  grid.half_length = p.num("half-length", 30.0);
  validate_grid(grid);
  return grid;
}

PulseProfile pulse_from(const Params& p, const BridgeGrid& grid, double c) {
  const PulseProfile primary = solve_primary_pulse(c, grid);
  const std::vector<int> ks = parse_ks(p.str("ks", ""));
  if (ks.empty()) return primary;
  return construct_multipulse(primary, grid, p.integer("m", 1), ks);
}

void write_pulse_artifacts(Sink& sink, const PulseProfile& profile, const BridgeGrid& grid,
                           double delta) {
  sink.write("profile.json", io::profile_to_json(profile, grid));
  sink.write("profile.csv", io::profile_to_csv(profile, grid));
  const A0Report rep = a0_spectrum(profile, grid, delta);
  sink.write("a0_report.json", io::a0_report_to_json(rep));

  svg::Figure fig = base_figure("Pulse profile", "x", "U(x)");
  svg::Series s;
  for (int i = 0; i < grid.n; ++i) {
    s.x.push_back(grid.x(i));
    s.y.push_back(profile.u(i));
  }
  fig.series.push_back(std::move(s));
  bool labeled = false;
  for (double peak : profile.peaks) {
    svg::Marker m;
    m.x = peak;
    const int idx = static_cast<int>(std::llround((peak + grid.half_length) / grid.spacing()));
    m.y = profile.u(((idx % grid.n) + grid.n) % grid.n);
    m.color = "#d1242f";
    if (!labeled) {
      m.label = "peak";
      labeled = true;
    }
    fig.markers.push_back(std::move(m));
  }
  sink.write("pulse.svg", svg::render(fig));
}

void run_bridge_pulse(const Params& p, Sink& sink) {
  const BridgeGrid grid = grid_from(p);
  const PulseProfile profile = solve_primary_pulse(p.num("c", 1.2), grid);
  write_pulse_artifacts(sink, profile, grid, p.num("delta", -1.0));
}

void run_bridge_multipulse(const Params& p, Sink& sink) {
  const BridgeGrid grid = grid_from(p);
  const double c = p.num("c", 1.2);
  const PulseProfile primary = solve_primary_pulse(c, grid);
  const std::vector<int> ks = parse_ks(p.str("ks", "1"));
  if (ks.empty()) throw ConfigInvalid("--ks must list at least one phase offset");
  const PulseProfile multi = construct_multipulse(primary, grid, p.integer("m", 1), ks);
  write_pulse_artifacts(sink, multi, grid, p.num("delta", -1.0));
}

PulseFamily family_around(const BridgeGrid& grid, double c, double half_width, int count) {
  return build_family(c - half_width, c + half_width, count, grid);
}

/// Kernel cut for the index formula: between the measured near-zero
/// (translation) eigenvalue and the smallest genuine small eigenvalue.
double hki_kernel_cut(const A0Report& rep) {
  double artifact = -1.0, signal = -1.0;
  for (const SmallEigenvalue& se : rep.small) {
    const double a = std::abs(se.nu);
    if (se.kernel)
      artifact = std::max(artifact, a);
    else
      signal = signal < 0 ? a : std::min(signal, a);
  }
  if (artifact < 0) return -1.0;  // no kernel seen: library default
  if (signal <= 0 || signal <= artifact) return 10.0 * artifact + 1e-14;
  return std::sqrt(std::max(artifact, 1e-16) * signal);
}

void run_bridge_spectrum(const Params& p, Sink& sink, const Tolerances& tol) {
  const BridgeGrid grid = grid_from(p);
  const double c = p.num("c", 1.2);
  const PulseProfile profile = pulse_from(p, grid, c);
  sink.write("profile.json", io::profile_to_json(profile, grid));
  const A0Report a0rep = a0_spectrum(profile, grid, p.num("delta", -1.0));
  sink.write("a0_report.json", io::a0_report_to_json(a0rep));

  double window = p.num("kernel-window", -1.0);
  if (window < 0) {
    // Auto: predict where the interaction pairs and the discrete kernel
    // artifact pair sit, and place the census cut between them.
    const PulseFamily family = family_around(grid, c, p.num("family-halfwidth", 0.04),
                                             p.integer("family-count", 9));
    window = kernel_window_from(interaction_prediction(family, c, a0rep.small));
  }
  const SpectrumReport rep = quadratic_spectrum(profile, grid, tol, window);
  sink.write("spectrum.json", io::spectrum_to_json(rep));
  sink.write("spectrum.csv", io::spectrum_to_csv(rep));

  const RealMatrix a0 = a0_matrix(profile, grid);
  const RealMatrix a1 = -2.0 * c * periodic_derivative(grid, 1);
  const IndexReport formula = hki_quadratic(a0.cast<Complex>(), a1.cast<Complex>(),
                                            Matrix::Identity(grid.n, grid.n), tol,
                                            hki_kernel_cut(a0rep));
  sink.write("index_report.json", io::index_report_to_json(formula));
  sink.write("census.json", io::census_check_to_json(census_check(formula, rep)));

  const double rho = essential_band(c).rho;
  sink.write("spectrum.svg",
             svg::render(spectrum_figure(rep, "Travelling-pencil spectrum", {rho, -rho})));
}

void run_bridge_krein(const Params& p, Sink& sink) {
  const BridgeGrid grid = grid_from(p);
  const double c = p.num("c", 1.2);
  const PulseFamily family = family_around(grid, c, p.num("family-halfwidth", 0.05),
                                           p.integer("family-count", 11));
  const PulseProfile primary = family.profiles[static_cast<size_t>(family.index_of(c))];
  const std::vector<int> ks = parse_ks(p.str("ks", "1"));
  if (ks.empty()) throw ConfigInvalid("--ks must list at least one phase offset");
  const PulseProfile multi = construct_multipulse(primary, grid, p.integer("m", 1), ks);

  const KreinDiagonalReport rep = verify_krein_diagonal(multi, family);
  sink.write("krein_diag.json", io::krein_diagonal_to_json(rep));

  std::ostringstream csv;
  csv << "z";
  for (Eigen::Index j = 0; j < rep.curves.cols(); ++j) csv << ",minus_k_over_z_" << (j + 1);
  csv << '\n';
  for (size_t i = 0; i < rep.z_points.size(); ++i) {
    csv << io::format_full(rep.z_points[i]);
    for (Eigen::Index j = 0; j < rep.curves.cols(); ++j)
      csv << ',' << io::format_full(rep.curves(static_cast<Eigen::Index>(i), j));
    csv << '\n';
  }
  sink.write("krein_diag.csv", csv.str());

  svg::Figure fig = base_figure("Krein matrix diagonal vs z", "z", "-K_jj(z)/z");
  for (Eigen::Index j = 0; j < rep.curves.cols(); ++j) {
    svg::Series s;
    s.color = kPalette[static_cast<size_t>(j) % 7];
    s.label = "diagonal " + std::to_string(j + 1);
    for (size_t i = 0; i < rep.z_points.size(); ++i) {
      s.x.push_back(rep.z_points[i]);
      s.y.push_back(rep.curves(static_cast<Eigen::Index>(i), j));
    }
    fig.series.push_back(std::move(s));
    svg::Marker m;
    m.x = 0;
    m.y = rep.nu_scaled[static_cast<size_t>(j)];
    m.color = s.color;
    fig.markers.push_back(std::move(m));
  }
  sink.write("krein_diag.svg", svg::render(fig));
}

const std::vector<ParamSpec>& specs_for(const std::string& scenario) {
  static const std::map<std::string, std::vector<ParamSpec>> all = {
      {"core-demo", {{"pencil", "", "path to a pencil JSON; omitted = built-in 2x2 demo"}}},
      {"kdv5-dispersion",
       {{"b", "-8/15", "second-order dispersion coefficient"},
        {"mu-min", "0", "Floquet window start"},
        {"mu-max", "0.5", "Floquet window end"},
        {"points", "501", "mu samples"},
        {"n-min", "-3", "lowest mode"},
        {"n-max", "3", "highest mode"}}},
      {"kdv5-wave",
       {{"amplitude", "0.023", "pinned cos-amplitude 2 U_1"},
        {"b", "-8/15", "second-order dispersion coefficient"},
        {"modes", "32", "Fourier truncation"}}},
      {"kdv5-scan",
       {{"amplitude", "0.023", "pinned cos-amplitude"},
        {"b", "-8/15", "second-order dispersion coefficient"},
        {"modes", "32", "Fourier truncation"},
        {"mu-min", "0.15", "scan start (must be > 0)"},
        {"mu-max", "0.45", "scan end"},
        {"points", "400", "mu samples"},
        {"refine", "1", "1: refine bubbles seeded at the predicted collisions"}}},
      {"kdv5-krein",
       {{"amplitude", "0.023", "pinned cos-amplitude"},
        {"b", "-8/15", "second-order dispersion coefficient"},
        {"modes", "32", "Fourier truncation"},
        {"mu", "0.3675", "Floquet parameter"},
        {"z-min", "-0.155", "branch window start"},
        {"z-max", "-0.085", "branch window end"},
        {"points", "701", "z samples"}}},
      {"bridge-pulse",
       {{"c", "1.2", "wavespeed in (0, sqrt(2))"},
        {"n", "512", "grid points"},
        {"half-length", "30", "domain half-length L"},
        {"delta", "-1", "small-eigenvalue report window (-1: auto)"}}},
      {"bridge-multipulse",
       {{"c", "1.2", "wavespeed"},
        {"n", "512", "grid points"},
        {"half-length", "30", "domain half-length L"},
        {"m", "1", "separation index"},
        {"ks", "1", "comma-separated phase offsets k_1..k_{n-1}"},
        {"delta", "-1", "small-eigenvalue report window (-1: auto)"}}},
      {"bridge-spectrum",
       {{"c", "1.2", "wavespeed"},
        {"n", "512", "grid points"},
        {"half-length", "30", "domain half-length L"},
        {"m", "1", "separation index"},
        {"ks", "1", "comma-separated phase offsets; empty = primary pulse"},
        {"delta", "-1", "small-eigenvalue report window (-1: auto)"},
        {"kernel-window", "-1", "census cut around the origin (-1: auto via prediction)"},
        {"family-halfwidth", "0.04", "speed half-width for the auto window"},
        {"family-count", "9", "family size for the auto window"}}},
      {"bridge-krein",
       {{"c", "1.2", "wavespeed"},
        {"n", "512", "grid points"},
        {"half-length", "30", "domain half-length L"},
        {"m", "1", "separation index"},
        {"ks", "1", "comma-separated phase offsets"},
        {"family-halfwidth", "0.05", "speed half-width for d''(c)"},
        {"family-count", "11", "family size for d''(c)"}}},
  };
  auto it = all.find(scenario);
  if (it == all.end()) {
    std::ostringstream msg;
    msg << "unknown scenario '" << scenario << "'; expected one of:";
    for (const auto& [name, _] : all) msg << ' ' << name;
    throw ConfigInvalid(msg.str());
  }
  return it->second;
}

double env_override(const char* name, double fallback) {
  const char* raw = std::getenv(name);
  if (!raw || !*raw) return fallback;
  try {
    return std::stod(raw);
  } catch (const std::exception&) {
    throw ConfigInvalid(std::string("environment override ") + name +
                        " expects a number, got '" + raw + "'");
  }
}

}  // namespace

std::vector<std::string> scenario_names() {
  return {"core-demo",       "kdv5-dispersion", "kdv5-wave",
          "kdv5-scan",       "kdv5-krein",      "bridge-pulse",
          "bridge-multipulse", "bridge-spectrum", "bridge-krein"};
}

std::string scenario_help() {
  std::ostringstream out;
  for (const std::string& name : scenario_names()) {
    out << name << '\n';
    for (const ParamSpec& s : specs_for(name)) {
      out << "  --" << s.key;
      if (!s.default_value.empty()) out << " (default " << s.default_value << ")";
      out << "  " << s.doc << '\n';
    }
  }
  return out.str();
}

krein::Tolerances tolerances_from_env() {
  Tolerances tol;
  tol.sym = env_override("KREINTOOL_TOL_SYM", tol.sym);
  tol.rank = env_override("KREINTOOL_TOL_RANK", tol.rank);
  tol.resid = env_override("KREINTOOL_TOL_RESID", tol.resid);
  tol.pair = env_override("KREINTOOL_TOL_PAIR", tol.pair);
  tol.cluster = env_override("KREINTOOL_TOL_CLUSTER", tol.cluster);
  tol.zero_subspace = env_override("KREINTOOL_TOL_ZERO_SUBSPACE", tol.zero_subspace);
  tol.zero_r = env_override("KREINTOOL_TOL_ZERO_R", tol.zero_r);
  tol.slope = env_override("KREINTOOL_TOL_SLOPE", tol.slope);
  tol.match = env_override("KREINTOOL_TOL_MATCH", tol.match);
  tol.fd = env_override("KREINTOOL_TOL_FD", tol.fd);
  tol.cond_max = env_override("KREINTOOL_TOL_COND_MAX", tol.cond_max);
  tol.overlap = env_override("KREINTOOL_TOL_OVERLAP", tol.overlap);
  tol.unstable = env_override("KREINTOOL_TOL_UNSTABLE", tol.unstable);
  tol.zero_lambda = env_override("KREINTOOL_TOL_ZERO_LAMBDA", tol.zero_lambda);
  return tol;
}

std::vector<std::string> run(const RunConfig& config) {
  const Params params(config.parameters, specs_for(config.scenario));
  if (config.output_dir.empty()) throw ConfigInvalid("an output directory is required (--out)");
  std::filesystem::create_directories(config.output_dir);
  const Tolerances tol = tolerances_from_env();

  Sink sink;
  sink.dir = config.output_dir;
  if (config.scenario == "core-demo")
    run_core_demo(params, sink, tol);
  else if (config.scenario == "kdv5-dispersion")
    run_kdv5_dispersion(params, sink);
  else if (config.scenario == "kdv5-wave")
    run_kdv5_wave(params, sink);
  else if (config.scenario == "kdv5-scan")
    run_kdv5_scan(params, sink, tol);
  else if (config.scenario == "kdv5-krein")
    run_kdv5_krein(params, sink, tol);
  else if (config.scenario == "bridge-pulse")
    run_bridge_pulse(params, sink);
  else if (config.scenario == "bridge-multipulse")
    run_bridge_multipulse(params, sink);
  else if (config.scenario == "bridge-spectrum")
    run_bridge_spectrum(params, sink, tol);
  else if (config.scenario == "bridge-krein")
    run_bridge_krein(params, sink);

  sink.write("manifest.json", io::manifest_to_json(config.scenario, config.parameters,
                                                   sink.names, config.seed));
  return sink.names;
}

}  // namespace kreintool
