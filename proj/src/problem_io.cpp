#include "qfratio/problem_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "qfratio/errors.hpp"

namespace qfratio {

namespace {

using nlohmann::json;

Matrix read_matrix(const json& j, const char* name) {
  if (!j.is_array() || j.empty()) {
    throw InvalidInput(std::string("\"") + name + "\" must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidInput(std::string("\"") + name + "\" rows must be arrays of equal length");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw InvalidInput(std::string("\"") + name + "\" must hold numbers");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

Vector read_vector(const json& j, const char* name) {
  if (!j.is_array()) throw InvalidInput(std::string("\"") + name + "\" must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidInput(std::string("\"") + name + "\" must hold numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

}  // namespace

QuadFormRatio parse_problem(const std::string& text, const Tolerances& tol) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("problem file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("problem file must hold a JSON object");
  for (const char* key : {"A", "B", "mu"}) {
    if (!j.contains(key)) throw InvalidInput(std::string("problem file lacks \"") + key + "\"");
  }
  const Matrix a = read_matrix(j["A"], "A");
  const Matrix b = read_matrix(j["B"], "B");
  const Vector mu = read_vector(j["mu"], "mu");
  if (j.contains("sigma") && !j["sigma"].is_null()) {
    return whiten(a, b, mu, read_matrix(j["sigma"], "sigma"), tol);
  }
  return make_ratio(a, b, mu, tol);
}

QuadFormRatio load_problem(const std::string& path, const Tolerances& tol) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read problem file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), tol);
}

std::string problem_to_json(const QuadFormRatio& ratio) {
  json j;
  j["A"] = matrix_json(ratio.A());
  j["B"] = matrix_json(ratio.B());
  j["mu"] = std::vector<double>(ratio.mu().data(), ratio.mu().data() + ratio.mu().size());
  return j.dump(2);
}

void save_problem(const std::string& path, const QuadFormRatio& ratio) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write problem file " + path);
  out << problem_to_json(ratio) << '\n';
}

}  // namespace qfratio
