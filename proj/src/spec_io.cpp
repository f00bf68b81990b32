#include "delaystab/system_model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace delaystab {

namespace {

using ojson = nlohmann::ordered_json;

RMat matrix_from_json(const ojson& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw std::invalid_argument("matrix must be an array of " + std::to_string(n) + " rows");
  RMat m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw std::invalid_argument("matrix row must hold " + std::to_string(n) + " numbers");
    for (int k = 0; k < n; ++k) m(i, k) = row[k].get<double>();
  }
  return m;
}

ojson matrix_to_json(const RMat& m) {
  ojson rows = ojson::array();
  for (int i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vec vector_from_json(const ojson& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw std::invalid_argument("vector must hold " + std::to_string(n) + " numbers");
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = j[i].get<double>();
  return v;
}

ojson vector_to_json(const Vec& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace

SystemFile parse_system(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("parse error at ") + e.what());
  }

  SystemFile file;
  SystemSpec& s = file.spec;

  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ide")
    s.kind = Kind::IDE;
  else if (kind == "dde")
    s.kind = Kind::DDE;
  else
    throw std::invalid_argument("kind must be \"ide\" or \"dde\", got \"" + kind + "\"");

  s.dimension = j.at("dimension").get<int>();
  if (s.dimension <= 0) throw std::invalid_argument("dimension must be positive");
  s.tau_star = j.at("tau_star").get<double>();

  if (j.contains("delay_terms")) {
    for (const auto& dt : j.at("delay_terms")) {
      DelayTerm d;
      d.tau = dt.at("tau").get<double>();
      d.coefficient = matrix_from_json(dt.at("A"), s.dimension);
      s.delay_terms.push_back(std::move(d));
    }
  }
  if (j.contains("kernel")) {
    for (const auto& kp : j.at("kernel")) {
      KernelPiece p;
      const auto& iv = kp.at("interval");
      if (!iv.is_array() || iv.size() != 2)
        throw std::invalid_argument("kernel interval must be [a, b]");
      p.lower = iv[0].get<double>();
      p.upper = iv[1].get<double>();
      for (const auto& c : kp.at("coeffs")) p.coefficients.push_back(matrix_from_json(c, s.dimension));
      s.kernel.pieces.push_back(std::move(p));
    }
  }
  if (j.contains("history")) {
    HistoryFunction h;
    const auto& hj = j.at("history");
    h.step = hj.at("step").get<double>();
    for (const auto& v : hj.at("values")) h.samples.push_back(vector_from_json(v, s.dimension));
    if (j.contains("x0")) h.x0 = vector_from_json(j.at("x0"), s.dimension);
    file.history = std::move(h);
  } else if (j.contains("x0")) {
    throw std::invalid_argument("x0 given without a history block");
  }
  return file;
}

SystemFile load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system(buf.str());
}

std::string serialize_system(const SystemFile& file) {
  const SystemSpec& s = file.spec;
  ojson j;
  j["kind"] = (s.kind == Kind::IDE) ? "ide" : "dde";
  j["dimension"] = s.dimension;
  j["tau_star"] = s.tau_star;
  ojson terms = ojson::array();
  for (const auto& d : s.delay_terms) {
    ojson t;
    t["tau"] = d.tau;
    t["A"] = matrix_to_json(d.coefficient);
    terms.push_back(std::move(t));
  }
  j["delay_terms"] = std::move(terms);
  ojson kernel = ojson::array();
  for (const auto& p : s.kernel.pieces) {
    ojson kp;
    kp["interval"] = ojson::array({p.lower, p.upper});
    ojson coeffs = ojson::array();
    for (const auto& c : p.coefficients) coeffs.push_back(matrix_to_json(c));
    kp["coeffs"] = std::move(coeffs);
    kernel.push_back(std::move(kp));
  }
  j["kernel"] = std::move(kernel);
  if (file.history) {
    ojson h;
    h["step"] = file.history->step;
    ojson vals = ojson::array();
    for (const auto& v : file.history->samples) vals.push_back(vector_to_json(v));
    h["values"] = std::move(vals);
    j["history"] = std::move(h);
    if (file.history->x0) j["x0"] = vector_to_json(*file.history->x0);
  }
  return j.dump(2) + "\n";
}

void save_system(const SystemFile& file, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write spec file: " + path);
  out << serialize_system(file);
}

}  // namespace delaystab
