#include "graphcp/config.hpp"

#include <json.hpp>

#include <set>

#include "graphcp/error.hpp"

namespace graphcp {

namespace {

using nlohmann::json;

void only_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (allowed.count(key) == 0) throw ConfigError("unknown key '" + where + "." + key + "'");
  }
}

double get_number(const json& j, const std::string& key, const std::string& where,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& key, const std::string& where,
                        std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(where + "." + key + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& key, const std::string& where,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

WindowPrior parse_window(const json& j, const std::string& where) {
  only_keys(j, where, {"mode", "w", "eta"});
  WindowPrior w;
  w.mode = window_mode_from_string(get_string(j, "mode", where, "zero"));
  w.fixed = static_cast<int>(get_count(j, "w", where, 0));
  w.eta = get_number(j, "eta", where, w.eta);
  return w;
}

json window_json(const WindowPrior& w) {
  return json{{"mode", to_string(w.mode)}, {"w", w.fixed}, {"eta", w.eta}};
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(root, "config",
            {"model", "p_bar", "delta_prior", "window_prior", "gamma_loss", "varpi",
             "graph_scaling", "sampler"});
  RunConfig cfg;
  if (root.contains("model")) {
    const auto& m = root.at("model");
    only_keys(m, "model", {"family", "shape", "rate", "alpha"});
    const auto family = get_string(m, "family", "model", "poisson_gamma");
    if (family == "poisson_gamma") {
      if (m.contains("alpha")) throw ConfigError("model.alpha belongs to multinomial_dirichlet");
      cfg.model = PoissonGamma{get_number(m, "shape", "model", 1.0),
                               get_number(m, "rate", "model", 1.0)};
    } else if (family == "multinomial_dirichlet") {
      if (m.contains("shape") || m.contains("rate")) {
        throw ConfigError("model.shape/rate belong to poisson_gamma");
      }
      MultinomialDirichlet md;
      if (!m.contains("alpha")) {
        md.alpha = {1.0};
      } else if (m.at("alpha").is_number()) {
        md.alpha = {m.at("alpha").get<double>()};
      } else if (m.at("alpha").is_array()) {
        for (const auto& a : m.at("alpha")) {
          if (!a.is_number()) throw ConfigError("model.alpha entries must be numbers");
          md.alpha.push_back(a.get<double>());
        }
      } else {
        throw ConfigError("model.alpha must be a number or an array of numbers");
      }
      for (double a : md.alpha) {
        if (!(a > 0.0)) throw ConfigError("model.alpha entries must be positive");
      }
      cfg.model = md;
    } else {
      throw ConfigError("unknown model.family '" + family +
                        "' (expected poisson_gamma or multinomial_dirichlet)");
    }
    if (const auto* pg = std::get_if<PoissonGamma>(&*cfg.model)) {
      if (!(pg->shape > 0.0) || !(pg->rate > 0.0)) {
        throw ConfigError("model.shape and model.rate must be positive");
      }
    }
  }
  cfg.hyper.p_bar = get_number(root, "p_bar", "config", cfg.hyper.p_bar);
  if (root.contains("delta_prior")) {
    const auto& d = root.at("delta_prior");
    only_keys(d, "delta_prior", {"spike", "shape1", "shape2"});
    cfg.hyper.delta.spike = get_number(d, "spike", "delta_prior", cfg.hyper.delta.spike);
    cfg.hyper.delta.shape1 = get_number(d, "shape1", "delta_prior", cfg.hyper.delta.shape1);
    cfg.hyper.delta.shape2 = get_number(d, "shape2", "delta_prior", cfg.hyper.delta.shape2);
  }
  if (root.contains("window_prior")) {
    const auto& w = root.at("window_prior");
    cfg.hyper.windows.clear();
    if (w.is_array()) {
      for (std::size_t k = 0; k < w.size(); ++k) {
        cfg.hyper.windows.push_back(parse_window(w[k], "window_prior[" + std::to_string(k) + "]"));
      }
      if (cfg.hyper.windows.empty()) throw ConfigError("window_prior array is empty");
    } else {
      cfg.hyper.windows.push_back(parse_window(w, "window_prior"));
    }
  }
  cfg.hyper.gamma_loss = get_number(root, "gamma_loss", "config", cfg.hyper.gamma_loss);
  cfg.hyper.varpi = get_number(root, "varpi", "config", cfg.hyper.varpi);
  if (root.contains("graph_scaling")) {
    const auto& g = root.at("graph_scaling");
    only_keys(g, "graph_scaling", {"lambda_s", "degree_mode"});
    if (g.contains("lambda_s")) cfg.lambda_s = get_number(g, "lambda_s", "graph_scaling", 0.0);
    cfg.degree_mode =
        degree_mode_from_string(get_string(g, "degree_mode", "graph_scaling", "max"));
  }
  if (root.contains("sampler")) {
    const auto& s = root.at("sampler");
    only_keys(s, "sampler",
              {"iterations", "burn_in", "thin", "move_weights", "rho", "seed", "init",
               "init_iterations", "init_burn_in", "keep_idle_moves"});
    auto& c = cfg.sampler;
    c.iterations = get_count(s, "iterations", "sampler", c.iterations);
    c.burn_in = get_count(s, "burn_in", "sampler", c.burn_in);
    c.thin = get_count(s, "thin", "sampler", c.thin);
    c.rho = get_number(s, "rho", "sampler", c.rho);
    c.seed = get_count(s, "seed", "sampler", c.seed);
    c.init = init_strategy_from_string(get_string(s, "init", "sampler", to_string(c.init)));
    c.init_iterations = get_count(s, "init_iterations", "sampler", c.init_iterations);
    c.init_burn_in = get_count(s, "init_burn_in", "sampler", c.init_burn_in);
    if (s.contains("keep_idle_moves")) {
      if (!s.at("keep_idle_moves").is_boolean()) {
        throw ConfigError("sampler.keep_idle_moves must be a boolean");
      }
      c.keep_idle_moves = s.at("keep_idle_moves").get<bool>();
    }
    if (s.contains("move_weights")) {
      const auto& w = s.at("move_weights");
      const std::string where = "sampler.move_weights";
      only_keys(w, where, {"birth_death", "shift", "aux", "lag", "window"});
      c.weights.birth_death = get_number(w, "birth_death", where, c.weights.birth_death);
      c.weights.shift = get_number(w, "shift", where, c.weights.shift);
      c.weights.aux = get_number(w, "aux", where, c.weights.aux);
      c.weights.lag = get_number(w, "lag", where, c.weights.lag);
      c.weights.window = get_number(w, "window", where, c.weights.window);
    }
  }
  cfg.sampler.validate();
  if (cfg.lambda_s && !(*cfg.lambda_s >= 0.0)) {
    throw ConfigError("graph_scaling.lambda_s must be >= 0");
  }
  try {
    cfg.hyper.validate(static_cast<int>(cfg.hyper.windows.size()));
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json root;
  if (cfg.model) {
    if (const auto* pg = std::get_if<PoissonGamma>(&*cfg.model)) {
      root["model"] = {{"family", "poisson_gamma"}, {"shape", pg->shape}, {"rate", pg->rate}};
    } else {
      const auto& md = std::get<MultinomialDirichlet>(*cfg.model);
      root["model"] = {{"family", "multinomial_dirichlet"}, {"alpha", md.alpha}};
    }
  }
  root["p_bar"] = cfg.hyper.p_bar;
  root["delta_prior"] = {{"spike", cfg.hyper.delta.spike},
                         {"shape1", cfg.hyper.delta.shape1},
                         {"shape2", cfg.hyper.delta.shape2}};
  if (cfg.hyper.windows.size() == 1) {
    root["window_prior"] = window_json(cfg.hyper.windows.front());
  } else {
    json arr = json::array();
    for (const auto& w : cfg.hyper.windows) arr.push_back(window_json(w));
    root["window_prior"] = arr;
  }
  root["gamma_loss"] = cfg.hyper.gamma_loss;
  root["varpi"] = cfg.hyper.varpi;
  json scaling = {{"degree_mode", to_string(cfg.degree_mode)}};
  if (cfg.lambda_s) scaling["lambda_s"] = *cfg.lambda_s;
  root["graph_scaling"] = scaling;
  const auto& c = cfg.sampler;
  root["sampler"] = {{"iterations", c.iterations},
                     {"burn_in", c.burn_in},
                     {"thin", c.thin},
                     {"move_weights",
                      {{"birth_death", c.weights.birth_death},
                       {"shift", c.weights.shift},
                       {"aux", c.weights.aux},
                       {"lag", c.weights.lag},
                       {"window", c.weights.window}}},
                     {"rho", c.rho},
                     {"seed", c.seed},
                     {"init", to_string(c.init)},
                     {"init_iterations", c.init_iterations},
                     {"init_burn_in", c.init_burn_in},
                     {"keep_idle_moves", c.keep_idle_moves}};
  return root.dump();
}

ObservationModel resolve_model(const RunConfig& cfg, const SeriesPanel& panel) {
  const bool multinomial = panel.family() == ObservationFamily::kMultinomial;
  if (!cfg.model) {
    if (!multinomial) return PoissonGamma{1.0, 1.0};
    return MultinomialDirichlet{std::vector<double>(static_cast<std::size_t>(panel.categories()), 1.0)};
  }
  ObservationModel model = *cfg.model;
  if (auto* md = std::get_if<MultinomialDirichlet>(&model)) {
    if (!multinomial) throw ConfigError("multinomial_dirichlet model given for a count panel");
    if (md->alpha.size() == 1 && panel.categories() > 1) {
      md->alpha.assign(static_cast<std::size_t>(panel.categories()), md->alpha.front());
    }
  } else if (multinomial) {
    throw ConfigError("poisson_gamma model given for a multinomial panel");
  }
  validate_model(model, panel);
  return model;
}

}  // namespace graphcp
