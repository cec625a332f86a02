#include "qtomo/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qtomo/errors.hpp"
#include "qtomo/rotor_basis.hpp"

namespace qtomo {

using nlohmann::json;

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

int RunConfig::effective_j_max_truth() const {
  return reconstruction.j_max_truth > 0 ? reconstruction.j_max_truth : 2 * reconstruction.j_max;
}

int RunConfig::effective_l_max() const {
  return reconstruction.l_max > 0 ? reconstruction.l_max : 2 * reconstruction.j_max;
}

namespace {

json to_json(const RunConfig& c) {
  json j;
  j["species"] = {{"name", c.species.name},
                  {"element", c.species.element},
                  {"rotational_constant_cm", c.species.rotational_constant_cm},
                  {"bond_length_a", c.species.bond_length_a},
                  {"dalpha_a3", c.species.dalpha_a3},
                  {"z", c.species.z},
                  {"g_even", c.species.g_even},
                  {"g_odd", c.species.g_odd},
                  {"form_factor_table", c.species.form_factor_table}};
  j["temperature_k"] = c.temperature_k;
  j["pulse"] = {{"peak_intensity_w_cm2", c.pulse.peak_intensity_w_cm2},
                {"fwhm_fs", c.pulse.fwhm_fs},
                {"window_fwhms", c.pulse.window_fwhms},
                {"steps_per_fwhm", c.pulse.steps_per_fwhm}};
  j["grids"] = {{"n_theta", c.grids.n_theta},
                {"n_phi", c.grids.n_phi},
                {"n_t", c.grids.n_t},
                {"t0_fs", c.grids.t0_fs}};
  j["detector"] = {{"energy_kev", c.detector.energy_kev}, {"q_min", c.detector.q_min},
                   {"q_max", c.detector.q_max},           {"n_q", c.detector.n_q},
                   {"n_az", c.detector.n_az},             {"mode", c.detector.mode}};
  j["reconstruction"] = {{"j_max", c.reconstruction.j_max},
                         {"j_max_truth", c.reconstruction.j_max_truth},
                         {"n_iter", c.reconstruction.n_iter},
                         {"tol", c.reconstruction.tol},
                         {"lambda", c.reconstruction.lambda_auto
                                        ? json("auto")
                                        : json(c.reconstruction.lambda)},
                         {"l_max", c.reconstruction.l_max},
                         {"even_l_only", c.reconstruction.even_l_only},
                         {"use_inverted_movie", c.reconstruction.use_inverted_movie},
                         {"pin_parity", c.reconstruction.pin_parity},
                         {"mirror_m_blocks", c.reconstruction.mirror_m_blocks}};
  j["noise"] = {{"enabled", c.noise.enabled}, {"scale", c.noise.scale}, {"seed", c.noise.seed}};
  j["vib"] = {{"r", c.vib.r},         {"n_max", c.vib.n_max}, {"x_max", c.vib.x_max},
              {"n_x", c.vib.n_x},     {"n_t", c.vib.n_t},     {"state", c.vib.state},
              {"seed", c.vib.seed},   {"n_iter", c.vib.n_iter}, {"tol", c.vib.tol}};
  return j;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

std::string RunConfig::canonical_json() const { return to_json(*this).dump(); }

uint64_t RunConfig::hash() const { return fnv1a64(canonical_json()); }

void RunConfig::validate() const {
  RotorBasis basis(reconstruction.j_max, species.rotational_constant_cm);
  ResolutionRequirement rr = resolution_requirements(reconstruction.j_max, basis);
  double dt = basis.revival_time() / grids.n_t;
  std::ostringstream os;
  if (dt > rr.delta_t_max) {
    os << "config: movie step dt = " << dt << " s violates dt <= " << rr.delta_t_max
       << " s required for j_max = " << reconstruction.j_max << " (need n_t >= "
       << static_cast<int>(std::ceil(basis.revival_time() / rr.delta_t_max)) << ")";
    throw ConfigError(os.str());
  }
  int need_theta = 2 * effective_j_max_truth() + 1;
  if (grids.n_theta < need_theta) {
    os << "config: n_theta = " << grids.n_theta << " violates n_theta >= 2*j_max_truth+1 = "
       << need_theta;
    throw ConfigError(os.str());
  }
  int need_phi = 4 * effective_j_max_truth() + 1;
  if (grids.n_phi < need_phi) {
    os << "config: n_phi = " << grids.n_phi << " violates n_phi >= 4*j_max_truth+1 = " << need_phi;
    throw ConfigError(os.str());
  }
  if (grids.n_t < reconstruction.j_max * (reconstruction.j_max + 1) + 1) {
    os << "config: n_t = " << grids.n_t << " aliases the retained beat frequencies; need n_t >= "
       << reconstruction.j_max * (reconstruction.j_max + 1) + 1;
    throw ConfigError(os.str());
  }
  if (!reconstruction.lambda_auto && reconstruction.lambda <= 0.0)
    throw ConfigError("config: lambda must be positive or \"auto\"");
  if (detector.mode != "xray" && detector.mode != "electron")
    throw ConfigError("config: detector mode must be \"xray\" or \"electron\"");
  if (temperature_k < 0.0) throw ConfigError("config: temperature must be >= 0");
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig c;
  try {
    if (j.contains("species")) {
      const json& s = j["species"];
      maybe(s, "name", c.species.name);
      maybe(s, "element", c.species.element);
      maybe(s, "rotational_constant_cm", c.species.rotational_constant_cm);
      maybe(s, "bond_length_a", c.species.bond_length_a);
      maybe(s, "dalpha_a3", c.species.dalpha_a3);
      maybe(s, "z", c.species.z);
      maybe(s, "g_even", c.species.g_even);
      maybe(s, "g_odd", c.species.g_odd);
      maybe(s, "form_factor_table", c.species.form_factor_table);
    }
    maybe(j, "temperature_k", c.temperature_k);
    if (j.contains("pulse")) {
      const json& p = j["pulse"];
      maybe(p, "peak_intensity_w_cm2", c.pulse.peak_intensity_w_cm2);
      maybe(p, "fwhm_fs", c.pulse.fwhm_fs);
      maybe(p, "window_fwhms", c.pulse.window_fwhms);
      maybe(p, "steps_per_fwhm", c.pulse.steps_per_fwhm);
    }
    if (j.contains("grids")) {
      const json& g = j["grids"];
      maybe(g, "n_theta", c.grids.n_theta);
      maybe(g, "n_phi", c.grids.n_phi);
      maybe(g, "n_t", c.grids.n_t);
      maybe(g, "t0_fs", c.grids.t0_fs);
    }
    if (j.contains("detector")) {
      const json& d = j["detector"];
      maybe(d, "energy_kev", c.detector.energy_kev);
      maybe(d, "q_min", c.detector.q_min);
      maybe(d, "q_max", c.detector.q_max);
      maybe(d, "n_q", c.detector.n_q);
      maybe(d, "n_az", c.detector.n_az);
      maybe(d, "mode", c.detector.mode);
    }
    if (j.contains("reconstruction")) {
      const json& r = j["reconstruction"];
      maybe(r, "j_max", c.reconstruction.j_max);
      maybe(r, "j_max_truth", c.reconstruction.j_max_truth);
      maybe(r, "n_iter", c.reconstruction.n_iter);
      maybe(r, "tol", c.reconstruction.tol);
      if (r.contains("lambda")) {
        if (r["lambda"].is_string() && r["lambda"] == "auto") {
          c.reconstruction.lambda_auto = true;
        } else {
          c.reconstruction.lambda = r["lambda"].get<double>();
          c.reconstruction.lambda_auto = false;
        }
      }
      maybe(r, "l_max", c.reconstruction.l_max);
      maybe(r, "even_l_only", c.reconstruction.even_l_only);
      maybe(r, "use_inverted_movie", c.reconstruction.use_inverted_movie);
      maybe(r, "pin_parity", c.reconstruction.pin_parity);
      maybe(r, "mirror_m_blocks", c.reconstruction.mirror_m_blocks);
    }
    if (j.contains("noise")) {
      const json& n = j["noise"];
      maybe(n, "enabled", c.noise.enabled);
      maybe(n, "scale", c.noise.scale);
      maybe(n, "seed", c.noise.seed);
    }
    if (j.contains("vib")) {
      const json& v = j["vib"];
      maybe(v, "r", c.vib.r);
      maybe(v, "n_max", c.vib.n_max);
      maybe(v, "x_max", c.vib.x_max);
      maybe(v, "n_x", c.vib.n_x);
      maybe(v, "n_t", c.vib.n_t);
      maybe(v, "state", c.vib.state);
      maybe(v, "seed", c.vib.seed);
      maybe(v, "n_iter", c.vib.n_iter);
      maybe(v, "tol", c.vib.tol);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: bad field type: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

} // namespace qtomo
