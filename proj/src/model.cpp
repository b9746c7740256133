#include "absa/model.hpp"

namespace absa::model {

GradCheckResult gradient_check(TransformerT<double>& model,
                               const std::vector<TrainExample>& batch, int num_samples,
                               unsigned long long seed, double eps) {
  if (batch.empty()) throw std::invalid_argument("gradient_check: empty batch");
  if (num_samples < 0) throw std::invalid_argument("gradient_check: negative sample count");

  using Tape = ad::Tape<double>;
  using Var = ad::Var<double>;

  auto loss_of = [&](Tape& t, const std::vector<Var>& bound) {
    std::vector<Var> losses;
    losses.reserve(batch.size());
    for (const auto& ex : batch)
      losses.push_back(model.sequence_nll(t, bound, ex.sentence, ex.gold,
                                          /*train=*/false, nullptr));
    return t.scale(t.sum_all(losses), 1.0 / static_cast<double>(batch.size()));
  };

  Tape t;
  auto bound = model.bind(t, /*needs_grad=*/true);
  auto loss = loss_of(t, bound);
  t.backward(loss);
  std::vector<ad::Matrix<double>> analytic;
  analytic.reserve(bound.size());
  for (auto v : bound) analytic.push_back(t.grad(v));

  auto eval = [&]() {
    Tape t2;
    auto b2 = model.bind(t2, /*needs_grad=*/false);
    return t2.value(loss_of(t2, b2))(0, 0);
  };

  long total_entries = 0;
  for (const auto& p : model.parameters()) total_entries += p.value.size();

  std::mt19937_64 rng(seed);
  GradCheckResult result;
  for (int s = 0; s < num_samples; ++s) {
    long flat = static_cast<long>(rng() % static_cast<unsigned long long>(total_entries));
    size_t k = 0;
    while (flat >= model.parameters()[k].value.size()) {
      flat -= model.parameters()[k].value.size();
      ++k;
    }
    double* entry = model.parameters()[k].value.data() + flat;
    const double original = *entry;
    *entry = original + eps;
    const double plus = eval();
    *entry = original - eps;
    const double minus = eval();
    *entry = original;

    const double fd = (plus - minus) / (2.0 * eps);
    const double an = analytic[k].data()[flat];
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
    result.max_rel_error = std::max(result.max_rel_error, std::abs(fd - an) / denom);
    ++result.samples;
  }
  return result;
}

}  // namespace absa::model
