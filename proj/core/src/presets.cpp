#include "linucbd/presets.hpp"

#include <cmath>

#include "linucbd/error.hpp"

namespace linucbd {

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

FiniteInstance two_arm_instance(bool diverse) {
  std::vector<Vector> theta{vec({0.8, 0.4}), vec({0.5, 0.7})};
  // x(2,1) = (0.2, 0.8): the value consistent with the published reward 0.66.
  std::vector<std::vector<Vector>> features{
      {vec({0.9, 0.1}), vec({0.75, 0.25}), vec({0.25, 0.75}), vec({0.1, 0.9})},
      {vec({0.2, 0.8}), vec({0.7, 0.3}), vec({0.3, 0.7}), vec({0.2, 0.8})},
  };
  if (diverse) {
    features[0][1] = vec({0.45, 0.65});
    features[0][2] = vec({0.55, 0.35});
    features[1][1] = vec({0.3, 0.5});
    features[1][2] = vec({0.7, 0.5});
  }
  return FiniteInstance(std::move(theta), std::move(features), 1.0, 1.0);
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_json_vector(const nlohmann::json& j, std::size_t d, const char* what) {
  if (!j.is_array() || j.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " must have " +
                                                   std::to_string(d) + " entries");
  }
  Vector v(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

NoiseSpec noise_from_json(const nlohmann::json& doc) {
  const auto name = doc.value("noise", std::string("gaussian"));
  if (name == "gaussian" || name == "standard-normal") return {NoiseKind::kStandardNormal};
  if (name == "none") return {NoiseKind::kNone};
  throw Error(ErrorCode::kParse, "unknown noise kind '" + name + "'");
}

}  // namespace

Preset preset(std::string_view name) {
  if (name == "paper61") {
    return {"paper61", two_arm_instance(false), 500'000, 100,
            {"linucb-d", "linucb", "greedy", "ucb-per-context"}};
  }
  if (name == "paper61-diverse") {
    return {"paper61-diverse", two_arm_instance(true), 500'000, 100,
            {"linucb-d", "linucb", "greedy", "ucb-per-context"}};
  }
  if (name == "paper62") {
    // [0,1]^4 features have norm at most 2.
    auto g = GeneralInstance::random_on_sphere(5, 4, 10.0, 2.0, 0.5, kPaper62ThetaSeed);
    return {"paper62", std::move(g), 500'000, 100, {"linucb-d", "greedy"}};
  }
  throw Error(ErrorCode::kUnknownPreset, "unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() { return {"paper61", "paper61-diverse", "paper62"}; }

nlohmann::json instance_to_json(const Instance& instance) {
  nlohmann::json doc;
  doc["K"] = arm_count(instance);
  doc["d"] = dimension(instance);
  doc["l"] = feature_bound(instance);
  doc["s"] = parameter_bound(instance);
  doc["noise"] = noise_of(instance).kind == NoiseKind::kNone ? "none" : "gaussian";
  auto theta = nlohmann::json::array();
  for (std::size_t a = 0; a < arm_count(instance); ++a) {
    theta.push_back(to_std(std::visit([a](const auto& i) { return i.theta(a); }, instance)));
  }
  doc["theta"] = std::move(theta);
  if (const auto* f = std::get_if<FiniteInstance>(&instance)) {
    doc["kind"] = "finite";
    doc["n"] = f->contexts();
    auto features = nlohmann::json::array();
    for (std::size_t a = 0; a < f->arms(); ++a) {
      auto row = nlohmann::json::array();
      for (std::size_t c = 0; c < f->contexts(); ++c) row.push_back(to_std(f->feature(a, c)));
      features.push_back(std::move(row));
    }
    doc["features"] = std::move(features);
    if (auto delta = f->declared_delta()) doc["delta"] = *delta;
  } else {
    const auto& g = std::get<GeneralInstance>(instance);
    doc["kind"] = "general";
    doc["delta"] = g.delta();
    doc["seed"] = g.seed();
    doc["max_attempts"] = g.max_attempts();
  }
  return doc;
}

Instance instance_from_json(const nlohmann::json& doc) {
  try {
    const auto kind = doc.at("kind").get<std::string>();
    const auto K = doc.at("K").get<std::size_t>();
    const auto d = doc.at("d").get<std::size_t>();
    const double l = doc.at("l").get<double>();
    const double s = doc.at("s").get<double>();
    const NoiseSpec noise = noise_from_json(doc);
    std::vector<Vector> theta;
    if (doc.contains("theta")) {
      const auto& t = doc.at("theta");
      if (!t.is_array() || t.size() != K) {
        throw Error(ErrorCode::kDimensionMismatch, "theta must list K vectors");
      }
      for (const auto& row : t) theta.push_back(from_json_vector(row, d, "theta entry"));
    }
    if (kind == "finite") {
      const auto n = doc.at("n").get<std::size_t>();
      if (theta.empty()) throw Error(ErrorCode::kParse, "finite instance needs theta");
      const auto& f = doc.at("features");
      if (!f.is_array() || f.size() != K) {
        throw Error(ErrorCode::kDimensionMismatch, "features must have K rows");
      }
      std::vector<std::vector<Vector>> features(K);
      for (std::size_t a = 0; a < K; ++a) {
        if (!f[a].is_array() || f[a].size() != n) {
          throw Error(ErrorCode::kDimensionMismatch, "features row must have n vectors");
        }
        for (const auto& x : f[a]) features[a].push_back(from_json_vector(x, d, "feature"));
      }
      std::optional<double> delta;
      if (doc.contains("delta") && !doc["delta"].is_null()) delta = doc["delta"].get<double>();
      return FiniteInstance(std::move(theta), std::move(features), l, s, noise, delta);
    }
    if (kind == "general") {
      const double delta = doc.at("delta").get<double>();
      const auto seed = doc.value("seed", std::uint64_t{0});
      const auto cap = doc.value("max_attempts", std::size_t{1'000'000});
      if (theta.empty()) {
        auto g = GeneralInstance::random_on_sphere(K, d, s, l, delta, seed, noise);
        std::vector<Vector> drawn;
        for (std::size_t a = 0; a < K; ++a) drawn.push_back(g.theta(a));
        return GeneralInstance(std::move(drawn), l, s, delta, noise, seed, cap);
      }
      return GeneralInstance(std::move(theta), l, s, delta, noise, seed, cap);
    }
    throw Error(ErrorCode::kParse, "instance kind must be 'finite' or 'general'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("instance document: ") + e.what());
  }
}

}  // namespace linucbd
