#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "switchaff/json_io.hpp"

namespace sa {

namespace {

using nlohmann::json;

json vec_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mat_json(const Mat& M) {
  json out = json::array();
  for (int r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    out.push_back(row);
  }
  return out;
}

Vec vec_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + " must be an array");
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw std::invalid_argument(what + " entries must be numbers");
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

Mat mat_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument(what + " must be a nonempty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0)
    throw std::invalid_argument(what + " rows must be nonempty arrays");
  Mat M(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw std::invalid_argument(what + " rows must have equal length");
    for (size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number())
        throw std::invalid_argument(what + " entries must be numbers");
      M(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
    }
  }
  return M;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad JSON: ") + e.what());
  }
}

json check_json(const CertificateCheck& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"margin", c.margin}};
}

json gram_digest(const QuarticGram& g) {
  return {{"basis", g.basis},
          {"dim", g.gram.rows()},
          {"min_eig", g.min_eig},
          {"recon_residual", g.recon_residual}};
}

json gram_digests(const std::vector<QuarticGram>& gs) {
  json out = json::array();
  for (const QuarticGram& g : gs) out.push_back(gram_digest(g));
  return out;
}

}  // namespace

SwitchedAffineSystem system_from_json(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw std::invalid_argument("system file must be an object");
  if (!j.contains("A") || !j.contains("b"))
    throw std::invalid_argument("system file needs \"A\" and \"b\"");
  const json& jA = j["A"];
  const json& jb = j["b"];
  if (!jA.is_array() || !jb.is_array() || jA.size() != jb.size())
    throw std::invalid_argument("\"A\" and \"b\" must list one entry per mode");
  std::vector<Mat> A;
  std::vector<Vec> b;
  for (size_t i = 0; i < jA.size(); ++i) {
    A.push_back(mat_from(jA[i], "A[" + std::to_string(i) + "]"));
    b.push_back(vec_from(jb[i], "b[" + std::to_string(i) + "]"));
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    for (const json& l : j["labels"]) {
      if (!l.is_string())
        throw std::invalid_argument("labels must be strings");
      labels.push_back(l.get<std::string>());
    }
  }
  SwitchedAffineSystem sys = SwitchedAffineSystem::make(A, b, labels);
  if (j.contains("n") && j["n"].get<int>() != sys.n)
    throw std::invalid_argument("declared n disagrees with matrix sizes");
  if (j.contains("N") && j["N"].get<int>() != sys.N)
    throw std::invalid_argument("declared N disagrees with the mode count");
  return sys;
}

std::string system_to_json(const SwitchedAffineSystem& sys) {
  json j;
  j["n"] = sys.n;
  j["N"] = sys.N;
  j["A"] = json::array();
  j["b"] = json::array();
  for (int i = 0; i < sys.N; ++i) {
    j["A"].push_back(mat_json(sys.A[i]));
    j["b"].push_back(vec_json(sys.b[i]));
  }
  if (!sys.labels.empty()) j["labels"] = sys.labels;
  return j.dump(2) + "\n";
}

DisturbanceProfile disturbance_from_json(const std::string& text, int n) {
  const json j = parse(text);
  if (!j.is_object())
    throw std::invalid_argument("disturbance file must be an object");
  for (const char* key : {"E", "breakpoints", "values"})
    if (!j.contains(key))
      throw std::invalid_argument(std::string("disturbance file needs \"") +
                                  key + "\"");
  DisturbanceProfile d;
  d.E = vec_from(j["E"], "E");
  if (d.E.size() != n)
    throw std::invalid_argument("disturbance channel E has wrong dimension");
  for (const json& t : j["breakpoints"]) {
    if (!t.is_number())
      throw std::invalid_argument("breakpoints must be numbers");
    d.breakpoints.push_back(t.get<double>());
  }
  for (const json& v : j["values"]) {
    if (!v.is_number()) throw std::invalid_argument("values must be numbers");
    d.values.push_back(v.get<double>());
  }
  d.validate();
  return d;
}

std::string law_report_json(const SwitchingLaw& law,
                            const CertificateReport& report) {
  json j;
  j["lambda"] = vec_json(law.cert.lambda.weights());
  j["x_e"] = vec_json(law.cert.x_e);
  j["P_bar"] = mat_json(law.cert.P_bar);
  j["P_perp"] = mat_json(law.cert.P_perp);
  j["P_cross"] = mat_json(law.cert.P_cross);
  j["P_eigenvalues"] = vec_json(report.P_eigenvalues);
  j["margins"] = {{"decrease", law.cert.margin_decrease},
                  {"positivity", law.cert.margin_positivity}};
  j["decrease_block"] = mat_json(report.decrease_block);
  json interior;
  interior["valid"] = law.interior.valid;
  interior["margin"] = law.interior.margin;
  interior["rank_ML"] = law.interior.rank_ML;
  interior["subset"] = law.interior.subset;
  if (law.interior.mu) interior["mu"] = vec_json(law.interior.mu->weights());
  j["interior"] = interior;
  j["checks"] = json::array();
  for (const CertificateCheck& c : report.checks)
    j["checks"].push_back(check_json(c));
  j["all_passed"] = report.all_passed;
  return j.dump(2) + "\n";
}

std::string rate_report_json(const RateCertificate& cert,
                             const SosResult& sos) {
  json j;
  j["certified"] = cert.certified;
  j["alpha"] = cert.alpha;
  j["epsilon"] = cert.eps;
  j["rho"] = cert.rho;
  j["beta"] = cert.beta;
  j["r"] = cert.r;
  json qe = json::array();
  if (cert.Q.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(cert.Q, Eigen::EigenvaluesOnly);
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      qe.push_back(es.eigenvalues()(i));
  }
  j["Q_eigenvalues"] = qe;
  j["solver_margin"] = sos.solver_margin;
  j["soundness_violations"] = sos.soundness_violations;
  j["grams"] = {{"lower", gram_digests(sos.grams_lower)},
                {"upper", gram_digests(sos.grams_upper)},
                {"multipliers_lower", gram_digests(sos.multipliers_lower)},
                {"multipliers_upper", gram_digests(sos.multipliers_upper)}};
  return j.dump(2) + "\n";
}

std::string rate_curve_json(const std::vector<RateCurveRow>& rows) {
  json arr = json::array();
  for (const RateCurveRow& row : rows)
    arr.push_back({{"r", row.r},
                   {"beta", row.beta},
                   {"epsilon", row.eps},
                   {"alpha", row.alpha}});
  json j;
  j["rows"] = arr;
  return j.dump(2) + "\n";
}

void atomic_write(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path dir = target.parent_path();
  if (dir.empty()) dir = ".";
  const fs::path tmp =
      dir / (target.filename().string() + ".tmp" +
             std::to_string(static_cast<unsigned>(::getpid())));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << text;
    out.flush();
    if (!out.good())
      throw std::runtime_error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename onto " + path + ": " +
                             ec.message());
  }
}

}  // namespace sa
