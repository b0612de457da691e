#include "mnrv/codec.hpp"

namespace mnrv {

using nlohmann::json;

void to_json(json& j, const HestonParams& h) {
  j = json{{"kappa", h.kappa}, {"sigma2", h.sigma2}, {"gamma", h.gamma}, {"rho", h.rho}};
}

void from_json(const json& j, HestonParams& h) {
  HestonParams d = reference_heston();
  h.kappa = j.value("kappa", d.kappa);
  h.sigma2 = j.value("sigma2", d.sigma2);
  h.gamma = j.value("gamma", d.gamma);
  h.rho = j.value("rho", d.rho);
}

void to_json(json& j, const SrSarvParams& s) {
  j = json{{"sigma2", s.sigma2}, {"omega2", s.omega2}, {"lambda", s.lambda}};
}

void from_json(const json& j, SrSarvParams& s) {
  s.sigma2 = j.at("sigma2").get<double>();
  s.omega2 = j.at("omega2").get<std::vector<double>>();
  s.lambda = j.at("lambda").get<std::vector<double>>();
}

void to_json(json& j, const NoiseParams& n) {
  j = json{{"f", n.f_coef},
           {"alpha", n.alpha},
           {"psi", n.psi},
           {"sigma_zeta", n.sigma_zeta},
           {"sigma_delta", n.sigma_delta},
           {"delta_kurtosis", n.delta_kurtosis}};
}

void from_json(const json& j, NoiseParams& n) {
  NoiseParams d = NoiseParams::reference();
  n.f_coef = j.value("f", d.f_coef);
  n.alpha = j.value("alpha", d.alpha);
  n.psi = j.value("psi", d.psi);
  n.sigma_zeta = j.value("sigma_zeta", d.sigma_zeta);
  n.sigma_delta = j.value("sigma_delta", d.sigma_delta);
  n.delta_kurtosis = j.value("delta_kurtosis", d.delta_kurtosis);
}

void to_json(json& j, const GeneratorInfo& g) {
  j = json{{"heston", g.heston},
           {"noise", g.noise},
           {"seed", g.seed},
           {"stationary_start", g.stationary_start}};
}

void from_json(const json& j, GeneratorInfo& g) {
  g.heston = j.at("heston").get<HestonParams>();
  g.noise = j.at("noise").get<NoiseParams>();
  g.seed = j.at("seed").get<std::uint64_t>();
  g.stationary_start = j.value("stationary_start", true);
}

}  // namespace mnrv
