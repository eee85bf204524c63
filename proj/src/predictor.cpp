#include "riskcb/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace rcb::regression {

std::string to_string(HeadKind kind) {
  switch (kind) {
    case HeadKind::Linear:
      return "linear";
    case HeadKind::Pricing:
      return "pricing";
    case HeadKind::Inventory:
      return "inventory";
  }
  return "unknown";
}

HeadKind head_kind_from_string(const std::string& name) {
  if (name == "linear") return HeadKind::Linear;
  if (name == "pricing") return HeadKind::Pricing;
  if (name == "inventory") return HeadKind::Inventory;
  throw std::invalid_argument("unknown head kind '" + name + "'");
}

std::string to_string(SolverKind kind) {
  return kind == SolverKind::GradientDescent ? "ogd" : "ons";
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "ogd") return SolverKind::GradientDescent;
  if (name == "ons") return SolverKind::OnlineNewton;
  throw std::invalid_argument("unknown oracle solver '" + name + "' (expected ogd or ons)");
}

double Predictor::predict(std::span<const double> x, const Action& a) const {
  return std::clamp(raw(x, a), 0.0, 1.0);
}

std::vector<double> Predictor::predict_all(std::span<const double> x, std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = predict(x, Action{i});
  return out;
}

std::function<double(double)> Predictor::bind(std::span<const double> x) const {
  std::vector<double> copy(x.begin(), x.end());
  return [this, copy = std::move(copy)](double a) { return predict(copy, Action{a}); };
}

// ---------------------------------------------------------------- linear

LinearModel::LinearModel(PredictorSpec spec) : spec_(std::move(spec)) {
  spec_.head = HeadKind::Linear;
  if (spec_.num_actions == 0) throw std::invalid_argument("linear model needs at least one action");
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(block() * spec_.num_actions));
}

LinearModel::LinearModel(std::size_t input_dim, std::size_t num_actions, double offset, bool intercept)
    : LinearModel([&] {
        PredictorSpec s;
        s.head = HeadKind::Linear;
        s.input_dim = input_dim;
        s.num_actions = num_actions;
        s.offset = offset;
        s.intercept = intercept;
        return s;
      }()) {}

void LinearModel::check(std::span<const double> x, std::size_t action) const {
  if (x.size() != spec_.input_dim) {
    throw std::invalid_argument("feature dimension mismatch: model expects " + std::to_string(spec_.input_dim) +
                                ", got " + std::to_string(x.size()));
  }
  if (action >= spec_.num_actions) {
    throw std::invalid_argument("action " + std::to_string(action) + " outside the model's " +
                                std::to_string(spec_.num_actions) + " actions");
  }
}

double LinearModel::raw(std::span<const double> x, const Action& a) const {
  const std::size_t action = action_index(a);
  check(x, action);
  const double* w = params_.data() + action * block();
  double s = spec_.offset;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * x[i];
  if (spec_.intercept) s += w[x.size()];
  return s;
}

void LinearModel::raw_gradient(std::span<const double> x, const Action& a, Eigen::VectorXd& out) const {
  const std::size_t action = action_index(a);
  check(x, action);
  out.setZero(params_.size());
  double* g = out.data() + action * block();
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i];
  if (spec_.intercept) g[x.size()] = 1.0;
}

std::vector<double> LinearModel::predict_all(std::span<const double> x, std::size_t count) const {
  if (count > spec_.num_actions) {
    throw std::invalid_argument("requested " + std::to_string(count) + " actions from a model with " +
                                std::to_string(spec_.num_actions));
  }
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = std::clamp(raw(x, Action{i}), 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------- heads

HeadModel::HeadModel(PredictorSpec spec)
    : spec_(std::move(spec)), features_(spec_.input_dim, spec_.num_frequencies, spec_.bandwidth, spec_.seed) {
  if (spec_.head == HeadKind::Linear) throw std::invalid_argument("HeadModel needs a pricing or inventory head");
  if (spec_.head == HeadKind::Inventory && !(spec_.beta >= 0.0 && spec_.beta < 1.0)) {
    throw std::invalid_argument("inventory head needs beta in [0,1)");
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * row()));
}

HeadModel::Context HeadModel::context(std::span<const double> x) const {
  Context c;
  c.phi.resize(row());
  features_.map_into(x, std::span<double>(c.phi.data(), features_.output_dim()));
  c.phi.back() = 1.0;
  const Eigen::Map<const Eigen::VectorXd> phi(c.phi.data(), static_cast<Eigen::Index>(row()));
  const auto n = static_cast<Eigen::Index>(row());
  c.u0 = params_.segment(0, n).dot(phi);
  c.u1 = params_.segment(n, n).dot(phi);
  c.z = zhead_from_logits(c.u0, c.u1);
  return c;
}

HeadGradient HeadModel::reward_head(const ZHead& z, double a) const {
  return spec_.head == HeadKind::Pricing ? pricing_predictor_grad(z, a)
                                         : inventory_predictor_grad(z, a, spec_.beta);
}

LossAdapter HeadModel::adapter() const {
  return spec_.head == HeadKind::Pricing ? LossAdapter(0.0, 1.0) : LossAdapter(-spec_.beta, 1.0 - spec_.beta);
}

double HeadModel::raw(std::span<const double> x, const Action& a) const {
  const Context c = context(x);
  const LossAdapter ad = adapter();
  return (ad.reward_hi() - reward_head(c.z, action_point(a)).value) / ad.width();
}

void HeadModel::raw_gradient(std::span<const double> x, const Action& a, Eigen::VectorXd& out) const {
  const Context c = context(x);
  const LossAdapter ad = adapter();
  const HeadGradient g = reward_head(c.z, action_point(a));
  const double du0 = -g.d_z0 * c.z.z0 * (1.0 - c.z.z0) / ad.width();
  const double du1 = -g.d_z1 * logistic(c.u1) / ad.width();
  const auto n = static_cast<Eigen::Index>(row());
  const Eigen::Map<const Eigen::VectorXd> phi(c.phi.data(), n);
  out.resize(params_.size());
  out.segment(0, n) = du0 * phi;
  out.segment(n, n) = du1 * phi;
}

std::function<double(double)> HeadModel::bind(std::span<const double> x) const {
  const ZHead z = context(x).z;
  const LossAdapter ad = adapter();
  return [this, z, ad](double a) {
    return std::clamp((ad.reward_hi() - reward_head(z, a).value) / ad.width(), 0.0, 1.0);
  };
}

std::unique_ptr<Predictor> make_predictor(const PredictorSpec& spec) {
  if (spec.head == HeadKind::Linear) return std::make_unique<LinearModel>(spec);
  return std::make_unique<HeadModel>(spec);
}

// ---------------------------------------------------------------- solvers

OnlineSolver::OnlineSolver(SolverConfig cfg, std::size_t dim) : cfg_(cfg) {
  if (cfg_.kind == SolverKind::GradientDescent && !(cfg_.step_scale > 0.0)) {
    throw std::invalid_argument("gradient descent step scale must be positive");
  }
  if (cfg_.kind == SolverKind::OnlineNewton) {
    if (!(cfg_.newton_epsilon > 0.0) || !(cfg_.newton_rate > 0.0)) {
      throw std::invalid_argument("online Newton step needs positive epsilon and rate");
    }
    const auto n = static_cast<Eigen::Index>(dim);
    a_inv_ = Eigen::MatrixXd::Identity(n, n) / cfg_.newton_epsilon;
    work_.resize(n);
  }
}

void OnlineSolver::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++t_;
  if (cfg_.kind == SolverKind::GradientDescent) {
    params.noalias() -= (cfg_.step_scale / std::sqrt(static_cast<double>(t_))) * grad;
    return;
  }
  if (grad.isZero(0.0)) return;
  // Sherman-Morrison update of A^{-1} after A += g g^T.
  work_.noalias() = a_inv_.selfadjointView<Eigen::Lower>() * grad;
  const double denom = 1.0 + grad.dot(work_);
  a_inv_.selfadjointView<Eigen::Lower>().rankUpdate(work_, -1.0 / denom);
  work_.noalias() = a_inv_.selfadjointView<Eigen::Lower>() * grad;
  params.noalias() -= cfg_.newton_rate * work_;
}

// ---------------------------------------------------------------- updates

double squared_loss_grad(double v, double vhat) { return 2.0 * (vhat - v); }

UpdateResult update_with(Predictor& p, OnlineSolver& solver, std::span<const double> x, const Action& a,
                         const std::function<double(double)>& loss_gradient) {
  for (double xi : x) {
    if (!std::isfinite(xi)) throw std::invalid_argument("non-finite feature in update");
  }
  UpdateResult r;
  const double raw = p.raw(x, a);
  r.prediction = std::clamp(raw, 0.0, 1.0);
  r.loss_gradient = loss_gradient(r.prediction);
  Eigen::VectorXd grad;
  // Outside the range the clamp is flat; on the boundary only a step back
  // inside is allowed.
  const bool flat = raw < 0.0 || raw > 1.0;
  const bool pushing_out = (raw <= 0.0 && r.loss_gradient > 0.0) || (raw >= 1.0 && r.loss_gradient < 0.0);
  if (flat || pushing_out) {
    r.clamped = true;
    grad.setZero(p.parameters().size());
  } else {
    p.raw_gradient(x, a, grad);
    grad *= r.loss_gradient;
  }
  solver.step(p.parameters(), grad);
  return r;
}

UpdateResult update(Predictor& p, OnlineSolver& solver, std::span<const double> x, const Action& a,
                    double observed_loss, const risk::ExpectileConfig& cfg) {
  if (!std::isfinite(observed_loss)) throw std::invalid_argument("non-finite observed loss");
  if (observed_loss < 0.0 || observed_loss > 1.0) throw std::invalid_argument("observed loss must lie in [0,1]");
  return update_with(p, solver, x, a,
                     [&](double vhat) { return risk::expectile_loss_grad(observed_loss, vhat, cfg); });
}

void RegretLedger::record(double oracle_loss, std::optional<double> comparator_loss) {
  if (oracle_loss < 0.0) throw std::invalid_argument("online losses are nonnegative");
  oracle_ += oracle_loss;
  if (comparator_loss) {
    if (*comparator_loss < 0.0) throw std::invalid_argument("online losses are nonnegative");
    comparator_ = comparator_.value_or(0.0) + *comparator_loss;
  }
  ++rounds_;
}

double RegretLedger::regret() const {
  if (!comparator_) throw std::logic_error("regret requires a comparator");
  return oracle_ - *comparator_;
}

// ---------------------------------------------------------------- checks

GradientReport gradient_check(const Predictor& p, std::span<const GradientProbe> probes,
                              const risk::ExpectileConfig& cfg, double step) {
  GradientReport report;
  auto model = p.clone();
  Eigen::VectorXd raw_grad;
  for (const GradientProbe& probe : probes) {
    const double raw = model->raw(probe.x, probe.a);
    model->raw_gradient(probe.x, probe.a, raw_grad);
    const double reach = 10.0 * step * std::max(raw_grad.cwiseAbs().sum(), 1e-12);
    const bool at_clamp = raw < reach || raw > 1.0 - reach;
    const bool at_kink = std::abs(raw - probe.v) < reach;
    if (at_clamp || at_kink) {
      ++report.excluded;
      continue;
    }
    const Eigen::VectorXd analytic = risk::expectile_loss_grad(probe.v, raw, cfg) * raw_grad;

    Eigen::VectorXd numeric(analytic.size());
    Eigen::VectorXd& params = model->parameters();
    for (Eigen::Index j = 0; j < params.size(); ++j) {
      const double saved = params[j];
      params[j] = saved + step;
      const double up = risk::expectile_loss(probe.v, model->predict(probe.x, probe.a), cfg);
      params[j] = saved - step;
      const double down = risk::expectile_loss(probe.v, model->predict(probe.x, probe.a), cfg);
      params[j] = saved;
      numeric[j] = (up - down) / (2.0 * step);
    }
    const double scale = std::max({analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff(), 1e-6});
    const double err = (analytic - numeric).cwiseAbs().maxCoeff() / scale;
    report.max_relative_error = std::max(report.max_relative_error, err);
    ++report.checked;
  }
  return report;
}

// ---------------------------------------------------------------- checkpoints

void save_predictor(const Predictor& p, std::ostream& out) {
  const PredictorSpec& s = p.spec();
  nlohmann::json j;
  j["format"] = "riskcb-predictor";
  j["version"] = kCheckpointVersion;
  j["head"] = to_string(s.head);
  j["input_dim"] = s.input_dim;
  j["num_actions"] = s.num_actions;
  j["offset"] = s.offset;
  j["intercept"] = s.intercept;
  j["num_frequencies"] = s.num_frequencies;
  j["bandwidth"] = s.bandwidth;
  j["seed"] = s.seed;
  j["beta"] = s.beta;
  j["feature_dim"] = p.parameters().size();
  j["parameters"] = std::vector<double>(p.parameters().data(), p.parameters().data() + p.parameters().size());
  out << j.dump() << '\n';
}

std::unique_ptr<Predictor> load_predictor(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("unreadable predictor checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "riskcb-predictor") throw std::runtime_error("not a predictor checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error("unsupported predictor checkpoint version " + j.value("version", nlohmann::json()).dump());
  }
  PredictorSpec s;
  s.head = head_kind_from_string(j.at("head").get<std::string>());
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.num_actions = j.at("num_actions").get<std::size_t>();
  s.offset = j.at("offset").get<double>();
  s.intercept = j.at("intercept").get<bool>();
  s.num_frequencies = j.at("num_frequencies").get<std::size_t>();
  s.bandwidth = j.at("bandwidth").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.beta = j.at("beta").get<double>();
  auto p = make_predictor(s);
  const auto params = j.at("parameters").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != p->parameters().size()) {
    throw std::runtime_error("checkpoint parameter count does not match its header");
  }
  p->parameters() = Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
  return p;
}

}  // namespace rcb::regression
