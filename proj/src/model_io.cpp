#include "omle/model_io.hpp"

#include <fstream>
#include <sstream>

#include "omle/errors.hpp"

namespace omle {

namespace {

using nlohmann::json;

const json& field(const json& j, const std::string& name) {
  if (!j.is_object()) throw ValidationError("model must be a JSON object");
  const auto it = j.find(name);
  if (it == j.end()) throw ValidationError("missing field \"" + name + "\"");
  return *it;
}

int positive_int(const json& j, const std::string& name) {
  const json& v = field(j, name);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ValidationError("field \"" + name + "\" must be a positive integer");
  }
  return v.get<int>();
}

const json& array_of(const json& v, std::size_t n, const std::string& where) {
  if (!v.is_array() || v.size() != n) {
    std::ostringstream msg;
    msg << "field \"" << where << "\" must be an array of length " << n;
    throw ValidationError(msg.str());
  }
  return v;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError("field \"" + where + "\" must be a number");
  return v.get<double>();
}

std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

Vector vector_from(const json& v, std::size_t n, const std::string& where) {
  array_of(v, n, where);
  Vector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], at(where, i));
  return out;
}

Matrix matrix_from(const json& v, std::size_t rows, std::size_t cols, const std::string& where) {
  array_of(v, rows, where);
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    out.row(static_cast<Eigen::Index>(r)) = vector_from(v[r], cols, at(where, r)).transpose();
  }
  return out;
}

json matrix_to(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

json model_to_json(const TabularPomdp& model) {
  json j;
  j["S"] = model.S;
  j["A"] = model.A;
  j["O"] = model.O;
  j["H"] = model.H;
  j["mu1"] = vector_to(model.mu1);
  json trans = json::array();
  for (const auto& per_action : model.trans) {
    json step = json::array();
    for (const Matrix& t : per_action) step.push_back(matrix_to(t));
    trans.push_back(std::move(step));
  }
  j["trans"] = std::move(trans);
  json emis = json::array();
  for (const Matrix& e : model.emis) emis.push_back(matrix_to(e));
  j["emis"] = std::move(emis);
  json rewards = json::array();
  for (const Vector& r : model.rewards) rewards.push_back(vector_to(r));
  j["rewards"] = std::move(rewards);
  return j;
}

TabularPomdp model_from_json(const json& j) {
  const int S = positive_int(j, "S");
  const int A = positive_int(j, "A");
  const int O = positive_int(j, "O");
  const int H = positive_int(j, "H");
  TabularPomdp m = TabularPomdp::zeros(S, A, O, H);
  const auto s = static_cast<std::size_t>(S);
  const auto o = static_cast<std::size_t>(O);
  m.mu1 = vector_from(field(j, "mu1"), s, "mu1");
  const json& trans = array_of(field(j, "trans"), static_cast<std::size_t>(H - 1), "trans");
  for (std::size_t h = 0; h + 1 < static_cast<std::size_t>(H); ++h) {
    array_of(trans[h], static_cast<std::size_t>(A), at("trans", h));
    for (std::size_t a = 0; a < static_cast<std::size_t>(A); ++a) {
      m.trans[h][a] = matrix_from(trans[h][a], s, s, at(at("trans", h), a));
    }
  }
  const json& emis = array_of(field(j, "emis"), static_cast<std::size_t>(H), "emis");
  const json& rewards = array_of(field(j, "rewards"), static_cast<std::size_t>(H), "rewards");
  for (std::size_t h = 0; h < static_cast<std::size_t>(H); ++h) {
    m.emis[h] = matrix_from(emis[h], o, s, at("emis", h));
    m.rewards[h] = vector_from(rewards[h], o, at("rewards", h));
  }
  return m;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
}

TabularPomdp load_model(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  try {
    return model_from_json(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_model(const TabularPomdp& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace omle
