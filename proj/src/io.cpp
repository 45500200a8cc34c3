#include "krein/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace krein::io {

using nlohmann::json;

namespace {

double number_from(const json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

json complex_pair(Complex z) { return json::array({format_full(z.real()), format_full(z.imag())}); }

json real_vector_json(const RealVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(format_full(v(i)));
  return out;
}

RealVector real_vector_from(const json& j) {
  RealVector v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v(i++) = number_from(e);
  return v;
}

}  // namespace

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigInvalid("cannot open for writing: " + path.string());
  out << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigInvalid("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string pencil_to_json(const StarEvenPencil& p) {
  json doc;
  doc["degree"] = p.degree();
  doc["dimension"] = p.dim();
  json coeffs = json::array();
  for (const Matrix& a : p.coeffs) {
    json mat = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) mat.push_back(complex_pair(a(r, c)));
    coeffs.push_back(std::move(mat));
  }
  doc["coefficients"] = std::move(coeffs);
  return doc.dump(2) + "\n";
}

StarEvenPencil pencil_from_json(const std::string& text) {
  const json doc = json::parse(text);
  const int degree = doc.at("degree").get<int>();
  const Eigen::Index d = doc.at("dimension").get<Eigen::Index>();
  const json& coeffs = doc.at("coefficients");
  if (static_cast<int>(coeffs.size()) != degree + 1)
    throw ConfigInvalid("pencil JSON: coefficient count does not match degree");
  StarEvenPencil p;
  for (const auto& mat : coeffs) {
    if (static_cast<Eigen::Index>(mat.size()) != d * d)
      throw ConfigInvalid("pencil JSON: matrix entry count does not match dimension");
    Matrix a(d, d);
    Eigen::Index k = 0;
    for (const auto& e : mat) {
      a(k / d, k % d) = Complex(number_from(e.at(0)), number_from(e.at(1)));
      ++k;
    }
    p.coeffs.push_back(std::move(a));
  }
  return p;
}

std::string spectrum_to_json(const SpectrumReport& rep) {
  json doc;
  json evs = json::array();
  for (const PolyEigenvalue& pe : rep.eigenvalues) {
    json e;
    e["lambda"] = complex_pair(pe.lambda);
    e["algebraic"] = pe.algebraic;
    e["geometric"] = pe.geometric;
    e["residual"] = format_full(pe.residual);
    e["on_imaginary_axis"] = pe.on_imaginary_axis;
    e["on_real_axis"] = pe.on_real_axis;
    e["essential_band"] = pe.essential_band;
    e["origin_cluster"] = pe.origin_cluster;
    if (pe.krein_index) e["krein_index"] = *pe.krein_index;
    evs.push_back(std::move(e));
  }
  doc["eigenvalues"] = std::move(evs);
  doc["census"] = {{"k_r", rep.census.k_r},
                   {"k_c", rep.census.k_c},
                   {"k_i_minus", rep.census.k_i_minus},
                   {"total", rep.census.total()}};
  doc["all_semisimple"] = rep.all_semisimple;
  doc["notes"] = rep.notes;
  return doc.dump(2) + "\n";
}

std::string spectrum_to_csv(const SpectrumReport& rep) {
  std::ostringstream out;
  out << "re,im,algebraic,geometric,krein_index,essential_band,origin_cluster,residual\n";
  for (const PolyEigenvalue& pe : rep.eigenvalues) {
    out << format_full(pe.lambda.real()) << ',' << format_full(pe.lambda.imag()) << ','
        << pe.algebraic << ',' << pe.geometric << ','
        << (pe.krein_index ? std::to_string(*pe.krein_index) : std::string()) << ','
        << (pe.essential_band ? 1 : 0) << ',' << (pe.origin_cluster ? 1 : 0) << ','
        << format_full(pe.residual) << '\n';
  }
  return out.str();
}

std::string curves_to_csv(const KreinCurveSet& curves) {
  std::ostringstream out;
  out << "z,valid";
  for (int j = 0; j < curves.n_branches(); ++j) out << ",r_" << (j + 1);
  out << '\n';
  for (size_t i = 0; i < curves.grid.size(); ++i) {
    out << format_full(curves.grid[i]) << ',' << (curves.valid[i] ? 1 : 0);
    for (int j = 0; j < curves.n_branches(); ++j)
      out << ',' << format_full(curves.branches[static_cast<size_t>(j)][i]);
    out << '\n';
  }
  return out.str();
}

std::string curves_to_json(const KreinCurveSet& curves) {
  json doc;
  json zeros = json::array();
  for (const KreinZero& z : curves.zeros)
    zeros.push_back({{"z", format_full(z.z)},
                     {"branch", z.branch},
                     {"slope", format_full(z.slope)},
                     {"signature", z.signature},
                     {"degenerate", z.degenerate},
                     {"residual", format_full(z.residual)}});
  json poles = json::array();
  for (const KreinPole& p : curves.poles)
    poles.push_back({{"z", format_full(p.z)},
                     {"removable", p.removable},
                     {"carries_full_eigenfunction", p.carries_full_eigenfunction},
                     {"det_growth", format_full(p.det_growth)}});
  doc["zeros"] = std::move(zeros);
  doc["poles"] = std::move(poles);
  doc["discontinuities"] = curves.discontinuities;
  doc["n_branches"] = curves.n_branches();
  return doc.dump(2) + "\n";
}

std::string index_report_to_json(const IndexReport& rep) {
  json doc;
  doc["k_ham"] = rep.k_ham;
  doc["n_a0"] = rep.n_a0;
  doc["n_a2"] = rep.n_a2;
  doc["n_constraint"] = rep.n_constraint;
  doc["kernel_dim"] = rep.kernel_dim;
  json cons = json::array();
  for (double v : rep.constraint_eigenvalues) cons.push_back(format_full(v));
  doc["constraint_eigenvalues"] = std::move(cons);
  doc["notes"] = rep.notes;
  return doc.dump(2) + "\n";
}

std::string census_check_to_json(const CensusCheck& check) {
  json doc;
  doc["consistent"] = check.consistent;
  doc["census_reliable"] = check.census_reliable;
  doc["formula_k_ham"] = check.formula;
  doc["census"] = {{"k_r", check.census.k_r},
                   {"k_c", check.census.k_c},
                   {"k_i_minus", check.census.k_i_minus},
                   {"total", check.census.total()}};
  doc["detail"] = check.detail;
  return doc.dump(2) + "\n";
}

std::string dispersion_to_csv(const std::vector<DispersionCurve>& curves) {
  std::ostringstream out;
  out << "mu";
  for (const DispersionCurve& c : curves) out << ",z(" << c.n << "),negative_signature(" << c.n << ")";
  out << '\n';
  if (curves.empty()) return out.str();
  const size_t rows = curves.front().points.size();
  for (size_t i = 0; i < rows; ++i) {
    out << format_full(curves.front().points[i].mu);
    for (const DispersionCurve& c : curves)
      out << ',' << format_full(c.points[i].z) << ',' << (c.points[i].negative_signature ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

std::string collisions_to_csv(const std::vector<CollisionPrediction>& collisions) {
  std::ostringstream out;
  out << "mu,z,n_pos,n_neg\n";
  for (const CollisionPrediction& c : collisions)
    out << format_full(c.mu) << ',' << format_full(c.z) << ',' << c.n_pos << ',' << c.n_neg << '\n';
  return out.str();
}

std::string scan_to_csv(const BlochScan& scan) {
  std::ostringstream out;
  out << "mu,max_re,n_a0\n";
  for (const BlochSample& s : scan.samples)
    out << format_full(s.mu) << ',' << format_full(s.max_re) << ',' << s.n_a0 << '\n';
  return out.str();
}

std::string wave_to_json(const PeriodicWave& wave) {
  json doc;
  doc["coefficients"] = real_vector_json(wave.coeffs);
  doc["epsilon"] = format_full(wave.epsilon);
  doc["ell"] = format_full(wave.ell);
  doc["residual_norm"] = format_full(wave.residual_norm);
  doc["iterations"] = wave.iterations;
  return doc.dump(2) + "\n";
}

PeriodicWave wave_from_json(const std::string& text) {
  const json doc = json::parse(text);
  PeriodicWave wave;
  wave.coeffs = real_vector_from(doc.at("coefficients"));
  wave.epsilon = number_from(doc.at("epsilon"));
  wave.ell = number_from(doc.at("ell"));
  if (doc.contains("residual_norm")) wave.residual_norm = number_from(doc.at("residual_norm"));
  if (doc.contains("iterations")) wave.iterations = doc.at("iterations").get<int>();
  return wave;
}

std::string profile_to_json(const PulseProfile& profile, const BridgeGrid& grid) {
  json doc;
  doc["grid"] = {{"n", grid.n}, {"half_length", format_full(grid.half_length)}};
  doc["u"] = real_vector_json(profile.u);
  doc["c"] = format_full(profile.c);
  doc["residual_norm"] = format_full(profile.residual_norm);
  doc["alpha"] = format_full(profile.alpha);
  doc["beta"] = format_full(profile.beta);
  json peaks = json::array();
  for (double p : profile.peaks) peaks.push_back(format_full(p));
  doc["peaks"] = std::move(peaks);
  doc["primary"] = profile.primary;
  doc["ks"] = profile.ks;
  doc["m"] = profile.m;
  doc["x_tilde"] = format_full(profile.x_tilde);
  doc["guess_remainder"] = format_full(profile.guess_remainder);
  return doc.dump(2) + "\n";
}

std::pair<PulseProfile, BridgeGrid> profile_from_json(const std::string& text) {
  const json doc = json::parse(text);
  BridgeGrid grid;
  grid.n = doc.at("grid").at("n").get<int>();
  grid.half_length = number_from(doc.at("grid").at("half_length"));
  PulseProfile prof;
  prof.u = real_vector_from(doc.at("u"));
  prof.c = number_from(doc.at("c"));
  prof.residual_norm = number_from(doc.at("residual_norm"));
  prof.alpha = number_from(doc.at("alpha"));
  prof.beta = number_from(doc.at("beta"));
  for (const auto& p : doc.at("peaks")) prof.peaks.push_back(number_from(p));
  prof.primary = doc.at("primary").get<bool>();
  prof.ks = doc.at("ks").get<std::vector<int>>();
  prof.m = doc.at("m").get<int>();
  if (doc.contains("x_tilde")) prof.x_tilde = number_from(doc.at("x_tilde"));
  if (doc.contains("guess_remainder"))
    prof.guess_remainder = number_from(doc.at("guess_remainder"));
  return {std::move(prof), grid};
}

std::string profile_to_csv(const PulseProfile& profile, const BridgeGrid& grid) {
  std::ostringstream out;
  out << "x,u\n";
  for (int i = 0; i < grid.n; ++i)
    out << format_full(grid.x(i)) << ',' << format_full(profile.u(i)) << '\n';
  return out.str();
}

std::string a0_report_to_json(const A0Report& rep) {
  json doc;
  json small = json::array();
  for (const SmallEigenvalue& se : rep.small)
    small.push_back({{"nu", format_full(se.nu)}, {"kernel", se.kernel}});
  doc["small"] = std::move(small);
  doc["delta_report"] = format_full(rep.delta_report);
  doc["band_edge"] = format_full(rep.band_edge);
  doc["band_edge_analytic"] = format_full(rep.band_edge_analytic);
  doc["lambda_minus"] = format_full(rep.lambda_minus);
  doc["gap_above_small"] = format_full(rep.gap_above_small);
  doc["notes"] = rep.notes;
  return doc.dump(2) + "\n";
}

std::string krein_diagonal_to_json(const KreinDiagonalReport& rep) {
  json doc;
  json zs = json::array();
  for (double z : rep.z_points) zs.push_back(format_full(z));
  doc["z_points"] = std::move(zs);
  json curves = json::array();
  for (Eigen::Index i = 0; i < rep.curves.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < rep.curves.cols(); ++j)
      row.push_back(format_full(rep.curves(i, j)));
    curves.push_back(std::move(row));
  }
  doc["minus_k_over_z_diag"] = std::move(curves);
  json fc = json::array(), fd = json::array(), nus = json::array();
  for (double v : rep.fitted_constant) fc.push_back(format_full(v));
  for (double v : rep.fitted_d2) fd.push_back(format_full(v));
  for (double v : rep.nu_scaled) nus.push_back(format_full(v));
  doc["fitted_constant"] = std::move(fc);
  doc["fitted_d2"] = std::move(fd);
  doc["nu_scaled"] = std::move(nus);
  doc["family_d2"] = format_full(rep.family_d2);
  doc["d2_relative_error"] = format_full(rep.d2_relative_error);
  doc["k1_magnitude"] = format_full(rep.k1_magnitude);
  doc["offdiag_ratio"] = format_full(rep.offdiag_ratio);
  doc["k2_paper_diag"] = format_full(rep.k2_paper_diag);
  doc["k2_quadrature"] = format_full(rep.k2_quadrature);
  doc["dxu_norm2"] = format_full(rep.dxu_norm2);
  doc["x_min"] = format_full(rep.x_min);
  doc["odd_even_inner"] = format_full(rep.odd_even_inner);
  doc["by_parts_gap"] = format_full(rep.by_parts_gap);
  doc["notes"] = rep.notes;
  return doc.dump(2) + "\n";
}

std::string manifest_to_json(const std::string& scenario,
                             const std::map<std::string, std::string>& parameters,
                             const std::vector<std::string>& artifacts, long seed) {
  json doc;
  doc["scenario"] = scenario;
  doc["parameters"] = parameters;
  doc["artifacts"] = artifacts;
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

std::string error_to_json(const std::string& code, const std::string& message) {
  json doc;
  doc["error"] = {{"code", code}, {"message", message}};
  return doc.dump(2) + "\n";
}

}  // namespace krein::io
