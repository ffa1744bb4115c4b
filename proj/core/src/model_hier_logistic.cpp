#include "advi/densities.hpp"
#include "advi/models.hpp"

namespace advi {

namespace {

/**
 * Multilevel logistic regression for individual binary responses with
 * demographic and geographic structure:
 *   logit p_n = b . [1, female_n, black_n, female_n black_n]
 *               + alpha_age[age_n] + alpha_edu[edu_n]
 *               + alpha_age_edu[age_n, edu_n] + alpha_state[state_n],
 *   alpha_state_j ~ N(alpha_region[region_j] + b_v_prev v_prev_j, sigma_state),
 *   other alpha groups ~ N(0, sigma_group),
 *   sigma_* ~ Unif(0, 100),  fixed effects b flat.
 * Index arrays (age, edu, state, region) are 1-based group labels.
 */
class HierLogistic final : public ModelBase<HierLogistic> {
 public:
  std::string name() const override { return "hier_logistic"; }

  void validate(const Dataset& data) const override {
    const Dims dm = dims(data);
    const std::size_t n = data.vector("y").size();
    for (const char* key : {"female", "black"}) {
      const Eigen::VectorXd v = data.vector(key);
      if (static_cast<std::size_t>(v.size()) != n) {
        throw data_error(std::string("hier_logistic: ") + key +
                         " length and y length differ");
      }
      for (double x : v)
        if (x != 0.0 && x != 1.0) {
          throw data_error(std::string("hier_logistic: ") + key +
                           " entries must be 0 or 1");
        }
    }
    for (double x : data.vector("y"))
      if (x != 0.0 && x != 1.0) {
        throw data_error("hier_logistic: y entries must be 0 or 1");
      }
    check_index(data, "age", n, dm.n_age);
    check_index(data, "edu", n, dm.n_edu);
    check_index(data, "state", n, dm.n_state);
    check_index(data, "region", dm.n_state, dm.n_region);
    if (data.vector("v_prev").size() != dm.n_state) {
      throw data_error("hier_logistic: v_prev length and region length differ");
    }
  }

  std::vector<ParamBlock> blocks(const Dataset& data) const override {
    const Dims dm = dims(data);
    return {{"b", ConstraintSpec::unconstrained(5), {}},
            {"alpha_age", ConstraintSpec::unconstrained(dm.n_age), {}},
            {"alpha_edu", ConstraintSpec::unconstrained(dm.n_edu), {}},
            {"alpha_age_edu",
             ConstraintSpec::unconstrained(dm.n_age * dm.n_edu),
             {}},
            {"alpha_region", ConstraintSpec::unconstrained(dm.n_region), {}},
            {"alpha_state", ConstraintSpec::unconstrained(dm.n_state), {}},
            {"sigma_age", ConstraintSpec::interval(0.0, 100.0), {}},
            {"sigma_edu", ConstraintSpec::interval(0.0, 100.0), {}},
            {"sigma_age_edu", ConstraintSpec::interval(0.0, 100.0), {}},
            {"sigma_region", ConstraintSpec::interval(0.0, 100.0), {}},
            {"sigma_state", ConstraintSpec::interval(0.0, 100.0), {}}};
  }

  std::size_t observation_count(const Dataset& data) const override {
    return data.vector("y").size();
  }

  template <class S>
  S eval_log_joint(const Dataset& data, std::span<const S> theta,
                   std::span<const std::size_t> minibatch,
                   double scale) const {
    const Dims dm = dims(data);
    const Eigen::VectorXd y = data.vector("y");
    const Eigen::VectorXd female = data.vector("female");
    const Eigen::VectorXd black = data.vector("black");
    const std::vector<long> age = data.int_vector("age");
    const std::vector<long> edu = data.int_vector("edu");
    const std::vector<long> state = data.int_vector("state");
    const std::vector<long> region = data.int_vector("region");
    const Eigen::VectorXd v_prev = data.vector("v_prev");

    std::size_t off = 0;
    std::span<const S> b = theta.subspan(off, 5);
    off += 5;
    std::span<const S> a_age = theta.subspan(off, dm.n_age);
    off += dm.n_age;
    std::span<const S> a_edu = theta.subspan(off, dm.n_edu);
    off += dm.n_edu;
    std::span<const S> a_age_edu = theta.subspan(off, dm.n_age * dm.n_edu);
    off += dm.n_age * dm.n_edu;
    std::span<const S> a_region = theta.subspan(off, dm.n_region);
    off += dm.n_region;
    std::span<const S> a_state = theta.subspan(off, dm.n_state);
    off += dm.n_state;
    const S& sigma_age = theta[off + 0];
    const S& sigma_edu = theta[off + 1];
    const S& sigma_age_edu = theta[off + 2];
    const S& sigma_region = theta[off + 3];
    const S& sigma_state = theta[off + 4];

    S lp = uniform_lpdf(sigma_age, 0.0, 100.0) +
           uniform_lpdf(sigma_edu, 0.0, 100.0) +
           uniform_lpdf(sigma_age_edu, 0.0, 100.0) +
           uniform_lpdf(sigma_region, 0.0, 100.0) +
           uniform_lpdf(sigma_state, 0.0, 100.0);
    for (const S& a : a_age) lp = lp + normal_lpdf(a, 0.0, sigma_age);
    for (const S& a : a_edu) lp = lp + normal_lpdf(a, 0.0, sigma_edu);
    for (const S& a : a_age_edu) lp = lp + normal_lpdf(a, 0.0, sigma_age_edu);
    for (const S& a : a_region) lp = lp + normal_lpdf(a, 0.0, sigma_region);
    for (std::size_t j = 0; j < dm.n_state; ++j) {
      lp = lp + normal_lpdf(a_state[j],
                            a_region[region[j] - 1] + b[4] * v_prev[j],
                            sigma_state);
    }

    S ll = detail::zero_like(theta);
    for_each_observation(minibatch, y.size(), [&](std::size_t n) {
      S logit = b[0] + b[1] * female[n] + b[2] * black[n] +
                b[3] * (female[n] * black[n]) + a_age[age[n] - 1] +
                a_edu[edu[n] - 1] +
                a_age_edu[(age[n] - 1) * dm.n_edu + (edu[n] - 1)] +
                a_state[state[n] - 1];
      ll = ll + bernoulli_logit_lpmf(y[n] != 0.0, logit);
    });
    return lp + scale * ll;
  }

 private:
  struct Dims {
    std::size_t n_age, n_edu, n_region, n_state;
  };

  static Dims dims(const Dataset& data) {
    Dims dm{};
    dm.n_age = max_index(data, "age");
    dm.n_edu = max_index(data, "edu");
    dm.n_region = max_index(data, "region");
    dm.n_state = data.int_vector("region").size();
    return dm;
  }

  static std::size_t max_index(const Dataset& data, const std::string& key) {
    long top = 0;
    for (long v : data.int_vector(key)) top = std::max(top, v);
    if (top < 1) throw data_error("hier_logistic: " + key + " has no groups");
    return static_cast<std::size_t>(top);
  }

  static void check_index(const Dataset& data, const std::string& key,
                          std::size_t expect_len, std::size_t bound) {
    const std::vector<long> v = data.int_vector(key);
    if (v.size() != expect_len) {
      throw data_error("hier_logistic: " + key + " has wrong length");
    }
    for (long x : v)
      if (x < 1 || static_cast<std::size_t>(x) > bound) {
        throw data_error("hier_logistic: " + key + " index out of range");
      }
  }
};

}  // namespace

const Model& hier_logistic_model() {
  static const HierLogistic model;
  return model;
}

}  // namespace advi
