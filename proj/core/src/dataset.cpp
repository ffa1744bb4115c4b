#include "advi/dataset.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace advi {

namespace {

using nlohmann::json;

void flatten(const json& node, std::size_t depth,
             std::vector<std::size_t>& shape, std::vector<double>& out,
             const std::string& name) {
  if (node.is_number()) {
    if (depth != shape.size()) {
      throw data_error("array '" + name + "' is jagged");
    }
    out.push_back(node.get<double>());
    return;
  }
  if (!node.is_array()) {
    throw data_error("entry '" + name + "' must be a number or array");
  }
  if (depth == shape.size()) {
    shape.push_back(node.size());
  } else if (shape[depth] != node.size()) {
    throw data_error("array '" + name + "' is jagged");
  }
  for (const json& child : node) {
    flatten(child, depth + 1, shape, out, name);
  }
}

}  // namespace

Dataset Dataset::from_json_string(const std::string& text) {
  json root = json::parse(text, nullptr, false);
  if (root.is_discarded()) throw data_error("invalid JSON");
  if (!root.is_object()) throw data_error("top-level JSON must be an object");
  Dataset d;
  for (const auto& [name, node] : root.items()) {
    Array a;
    flatten(node, 0, a.shape, a.values, name);
    std::size_t expect = 1;
    for (std::size_t s : a.shape) expect *= s;
    if (expect != a.values.size() || a.values.empty()) {
      throw data_error("array '" + name + "' is empty or jagged");
    }
    d.arrays_.emplace(name, std::move(a));
  }
  return d;
}

Dataset Dataset::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open data file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

std::string Dataset::to_json_string() const {
  json root = json::object();
  for (const auto& [name, a] : arrays_) {
    if (a.shape.empty()) {
      root[name] = a.values[0];
    } else if (a.shape.size() == 1) {
      root[name] = a.values;
    } else {
      json rows = json::array();
      const std::size_t stride = a.values.size() / a.shape[0];
      for (std::size_t r = 0; r < a.shape[0]; ++r) {
        // only rank 2 is emitted; higher ranks are not used
        json row = json::array();
        for (std::size_t c = 0; c < stride; ++c)
          row.push_back(a.values[r * stride + c]);
        rows.push_back(row);
      }
      root[name] = rows;
    }
  }
  return root.dump();
}

bool Dataset::has(const std::string& name) const {
  return arrays_.count(name) != 0;
}

const Dataset::Array& Dataset::array(const std::string& name) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) throw data_error("missing data entry '" + name + "'");
  return it->second;
}

void Dataset::set(const std::string& name, Array array) {
  arrays_[name] = std::move(array);
}

void Dataset::set_scalar(const std::string& name, double value) {
  arrays_[name] = Array{{}, {value}};
}

void Dataset::set_vector(const std::string& name, const Eigen::VectorXd& v) {
  Array a;
  a.shape = {static_cast<std::size_t>(v.size())};
  a.values.assign(v.data(), v.data() + v.size());
  arrays_[name] = std::move(a);
}

void Dataset::set_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  Array a;
  a.shape = {static_cast<std::size_t>(m.rows()),
             static_cast<std::size_t>(m.cols())};
  a.values.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) a.values.push_back(m(r, c));
  arrays_[name] = std::move(a);
}

double Dataset::scalar(const std::string& name) const {
  const Array& a = array(name);
  if (a.values.size() != 1) {
    throw data_error("entry '" + name + "' must be a scalar");
  }
  return a.values[0];
}

long Dataset::integer(const std::string& name) const {
  const double v = scalar(name);
  if (v != std::floor(v) || std::fabs(v) >= 9007199254740992.0) {
    throw data_error("entry '" + name + "' must be an integer");
  }
  return static_cast<long>(v);
}

Eigen::VectorXd Dataset::vector(const std::string& name) const {
  const Array& a = array(name);
  if (a.rank() > 1) throw data_error("entry '" + name + "' must be a vector");
  return Eigen::Map<const Eigen::VectorXd>(a.values.data(), a.values.size());
}

Eigen::MatrixXd Dataset::matrix(const std::string& name) const {
  const Array& a = array(name);
  if (a.rank() > 2) throw data_error("entry '" + name + "' must be a matrix");
  const std::size_t r = a.rows();
  const std::size_t c = a.rank() == 2 ? a.shape[1] : 1;
  Eigen::MatrixXd m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = a.values[i * c + j];
  return m;
}

std::vector<long> Dataset::int_vector(const std::string& name) const {
  const Array& a = array(name);
  if (a.rank() > 1) throw data_error("entry '" + name + "' must be a vector");
  std::vector<long> out;
  out.reserve(a.values.size());
  for (double v : a.values) {
    if (v != std::floor(v) || std::fabs(v) >= 9007199254740992.0) {
      throw data_error("entry '" + name + "' must hold integers");
    }
    out.push_back(static_cast<long>(v));
  }
  return out;
}

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> out;
  out.reserve(arrays_.size());
  for (const auto& [name, a] : arrays_) out.push_back(name);
  return out;
}

}  // namespace advi
