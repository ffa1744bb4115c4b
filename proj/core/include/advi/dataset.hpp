#pragma once

#include <Eigen/Core>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace advi {

/** Raised on malformed data files or schema mismatches. */
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Named numeric arrays loaded from a single JSON object:
 * { "name": scalar | [ ... ] | [[ ... ], ...] }, row-major.  Jagged arrays
 * and non-numeric entries are rejected at load time.
 */
class Dataset {
 public:
  struct Array {
    std::vector<std::size_t> shape;  // empty = scalar
    std::vector<double> values;      // row-major

    std::size_t rank() const { return shape.size(); }
    std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::size_t cols() const {
      return shape.size() < 2 ? (shape.empty() ? 1 : 1) : shape[1];
    }
  };

  static Dataset from_json_file(const std::string& path);
  static Dataset from_json_string(const std::string& text);
  std::string to_json_string() const;

  bool has(const std::string& name) const;
  const Array& array(const std::string& name) const;  // throws data_error
  void set(const std::string& name, Array array);
  void set_scalar(const std::string& name, double value);
  void set_vector(const std::string& name, const Eigen::VectorXd& v);
  void set_matrix(const std::string& name, const Eigen::MatrixXd& m);

  double scalar(const std::string& name) const;
  /** Scalar validated as an integer (exact, |x| < 2^53). */
  long integer(const std::string& name) const;
  /** Rank-1 view (scalars promote to length 1). */
  Eigen::VectorXd vector(const std::string& name) const;
  /** Rank-2 view (rank-1 promotes to a column). */
  Eigen::MatrixXd matrix(const std::string& name) const;
  std::vector<long> int_vector(const std::string& name) const;

  std::vector<std::string> names() const;

 private:
  std::map<std::string, Array> arrays_;
};

}  // namespace advi
