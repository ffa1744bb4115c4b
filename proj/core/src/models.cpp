#include "advi/models.hpp"

#include <array>

namespace advi {

double Model::predictive_log_density(const Dataset&, const Dataset&,
                                     std::size_t,
                                     std::span<const double>) const {
  throw std::logic_error("model '" + name() +
                         "' does not define a predictive density");
}

std::span<const Model* const> model_registry() {
  static const std::array<const Model*, 11> registry = {
      &weibull_poisson_model(),
      &mvn_conjugate_model(),
      &logistic_regression_model(),
      &stoch_vol_model(),
      &linreg_ard_model(),
      &hier_logistic_model(),
      &gamma_poisson_nmf_model(),
      &dirichlet_exponential_nmf_model(),
      &gmm_model(),
      &ppca_ard_model(),
      &sup_ppca_ard_model(),
  };
  return registry;
}

const Model* find_model(std::string_view name) {
  for (const Model* m : model_registry()) {
    if (m->name() == name) return m;
  }
  return nullptr;
}

TransformSet transform_set(const Model& model, const Dataset& data,
                           PositiveTransform positive) {
  std::vector<ConstraintSpec> specs;
  for (ParamBlock& b : model.blocks(data)) {
    if (b.constraint.kind == ConstraintKind::lower_bounded) {
      b.constraint.positive = positive;
    }
    for (std::size_t g = 0; g < b.groups; ++g) specs.push_back(b.constraint);
  }
  return TransformSet(std::move(specs));
}

std::vector<std::string> coordinate_names(std::span<const ParamBlock> blocks) {
  std::vector<std::string> names;
  for (const ParamBlock& b : blocks) {
    const std::size_t n = b.constrained_dim();
    if (b.shape.size() == 2) {
      for (std::size_t i = 0; i < b.shape[0]; ++i)
        for (std::size_t j = 0; j < b.shape[1]; ++j)
          names.push_back(b.name + "." + std::to_string(i + 1) + "." +
                          std::to_string(j + 1));
    } else {
      for (std::size_t i = 0; i < n; ++i)
        names.push_back(b.name + "." + std::to_string(i + 1));
    }
  }
  return names;
}

std::pair<std::size_t, std::size_t> block_range(
    std::span<const ParamBlock> blocks, std::string_view name) {
  std::size_t offset = 0;
  for (const ParamBlock& b : blocks) {
    if (b.name == name) return {offset, b.constrained_dim()};
    offset += b.constrained_dim();
  }
  throw std::out_of_range("no parameter block named '" + std::string(name) +
                          "'");
}

}  // namespace advi
