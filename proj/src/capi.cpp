#include "lassodual.h"

#include <cstring>
#include <string>

#include "lassodual/scenario.hpp"

using namespace lassodual;

namespace {

thread_local std::string g_last_error;

ld_status fail(ld_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
ld_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const RankDeficient& e) {
    return fail(LD_ERR_RANK_DEFICIENT, e.what());
  } catch (const K0Unreachable& e) {
    return fail(LD_ERR_K0_UNREACHABLE, e.what());
  } catch (const InvalidInput& e) {
    return fail(LD_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(LD_ERR_INTERNAL, e.what());
  }
}

CxVec to_cxvec(const double* re, const double* im, int n) {
  CxVec v(n);
  for (int i = 0; i < n; ++i) v(i) = cxd(re[i], im[i]);
  return v;
}

void from_cxvec(const CxVec& v, double* re, double* im) {
  for (int i = 0; i < v.size(); ++i) {
    re[i] = v(i).real();
    im[i] = v(i).imag();
  }
}

WeightMatrix make_weights(const double* weights, int size) {
  if (weights == nullptr) return WeightMatrix::identity(size);
  return WeightMatrix(Eigen::Map<const RealVec>(weights, size));
}

SourceScene make_scene(const double* doas, const double* powers,
                       const double* phases, int k) {
  if (k < 0 || (k > 0 && (doas == nullptr || powers == nullptr)))
    throw InvalidInput("scene arrays must be non-null");
  SourceScene scene;
  scene.doas_deg.assign(doas, doas + k);
  scene.powers.assign(powers, powers + k);
  if (phases != nullptr)
    scene.phases_rad.assign(phases, phases + k);
  else
    scene.phases_rad.assign(k, 0.0);
  return scene;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct ld_dictionary {
  SteeringDictionary dict;
};

struct ld_solution {
  double mu = 0.0;
  CxVec x;
  CxVec u;
  ActiveSets sets;
  bool converged = true;
  int solve_count = 0;
};

extern "C" {

const char* ld_last_error(void) { return g_last_error.c_str(); }

ld_status ld_dictionary_create_uniform(int sensors, int grid_size,
                                       ld_dictionary** out) {
  return guarded([&] {
    if (out == nullptr) throw InvalidInput("output pointer is null");
    *out = new ld_dictionary{SteeringDictionary(AngleGrid::uniform(grid_size), sensors)};
    return LD_OK;
  });
}

ld_status ld_dictionary_create_span(int sensors, double lo_deg, double hi_deg,
                                    double step_deg, ld_dictionary** out) {
  return guarded([&] {
    if (out == nullptr) throw InvalidInput("output pointer is null");
    *out = new ld_dictionary{
        SteeringDictionary(AngleGrid::span(lo_deg, hi_deg, step_deg), sensors)};
    return LD_OK;
  });
}

void ld_dictionary_destroy(ld_dictionary* dict) { delete dict; }

int ld_dictionary_sensors(const ld_dictionary* dict) {
  return dict ? dict->dict.sensors() : 0;
}

int ld_dictionary_size(const ld_dictionary* dict) {
  return dict ? dict->dict.size() : 0;
}

ld_status ld_dictionary_angles(const ld_dictionary* dict, double* angles_deg) {
  return guarded([&] {
    if (dict == nullptr || angles_deg == nullptr)
      throw InvalidInput("null argument");
    for (int m = 0; m < dict->dict.size(); ++m)
      angles_deg[m] = dict->dict.grid().angle_deg(m);
    return LD_OK;
  });
}

ld_status ld_dictionary_coherence(const ld_dictionary* dict, int i, int j,
                                  double* re, double* im) {
  return guarded([&] {
    if (dict == nullptr || re == nullptr || im == nullptr)
      throw InvalidInput("null argument");
    const cxd c = coherence(dict->dict, i, j);
    *re = c.real();
    *im = c.imag();
    return LD_OK;
  });
}

ld_status ld_dictionary_mutual_coherence(const ld_dictionary* dict, double* out) {
  return guarded([&] {
    if (dict == nullptr || out == nullptr) throw InvalidInput("null argument");
    *out = mutual_coherence(dict->dict);
    return LD_OK;
  });
}

ld_status ld_synthesize(const ld_dictionary* dict, const double* doas_deg,
                        const double* powers, const double* phases_rad,
                        int num_sources, double sigma2, uint64_t seed,
                        double* y_re, double* y_im) {
  return guarded([&] {
    if (dict == nullptr || y_re == nullptr || y_im == nullptr)
      throw InvalidInput("null argument");
    const Snapshot snap = synthesize(
        dict->dict, make_scene(doas_deg, powers, phases_rad, num_sources), sigma2,
        seed);
    from_cxvec(snap.y, y_re, y_im);
    return LD_OK;
  });
}

ld_status ld_sigma_for_snr(const ld_dictionary* dict, const double* doas_deg,
                           const double* powers, const double* phases_rad,
                           int num_sources, double snr_db, double* out) {
  return guarded([&] {
    if (dict == nullptr || out == nullptr) throw InvalidInput("null argument");
    *out = sigma_for_snr(dict->dict,
                         make_scene(doas_deg, powers, phases_rad, num_sources),
                         snr_db);
    return LD_OK;
  });
}

ld_status ld_mu_max(const ld_dictionary* dict, const double* weights,
                    const double* y_re, const double* y_im, double* out) {
  return guarded([&] {
    if (dict == nullptr || y_re == nullptr || y_im == nullptr || out == nullptr)
      throw InvalidInput("null argument");
    *out = mu_max(dict->dict, make_weights(weights, dict->dict.size()),
                  to_cxvec(y_re, y_im, dict->dict.sensors()));
    return LD_OK;
  });
}

ld_status ld_solve(const ld_dictionary* dict, const double* weights,
                   const double* y_re, const double* y_im, double mu,
                   ld_solution** out) {
  return guarded([&] {
    if (dict == nullptr || y_re == nullptr || y_im == nullptr || out == nullptr)
      throw InvalidInput("null argument");
    const WeightMatrix w = make_weights(weights, dict->dict.size());
    const CxVec y = to_cxvec(y_re, y_im, dict->dict.sensors());
    LassoProblem problem{&dict->dict, w, y, mu};
    const PrimalSolution sol = solve(problem);
    auto* result = new ld_solution;
    result->mu = mu;
    result->x = sol.x;
    result->u = dual_from_primal(dict->dict, w, y, sol.x, mu).u;
    result->sets = active_sets(result->x, result->u, mu);
    result->converged = sol.converged;
    result->solve_count = 1;
    *out = result;
    return sol.converged ? LD_OK
                         : fail(LD_ERR_NOT_CONVERGED, "solver did not converge");
  });
}

ld_status ld_select_mu(const ld_dictionary* dict, const double* weights,
                       const double* y_re, const double* y_im, int k0, double f,
                       ld_select_algorithm algorithm, ld_solution** out) {
  return guarded([&] {
    if (dict == nullptr || y_re == nullptr || y_im == nullptr || out == nullptr)
      throw InvalidInput("null argument");
    const WeightMatrix w = make_weights(weights, dict->dict.size());
    const CxVec y = to_cxvec(y_re, y_im, dict->dict.sensors());
    SelectorOptions opts;
    opts.f = f;
    SelectionResult sel;
    switch (algorithm) {
      case LD_SELECT_ORDER_RECURSIVE:
        sel = select_mu_order_recursive(dict->dict, w, y, k0, opts);
        break;
      case LD_SELECT_DUAL:
        sel = select_mu_dual(dict->dict, w, y, k0, opts);
        break;
      case LD_SELECT_FAST:
        sel = select_mu_fast(dict->dict, w, y, k0, opts);
        break;
      default:
        throw InvalidInput("unknown selection algorithm");
    }
    auto* result = new ld_solution;
    result->mu = sel.mu;
    result->x = sel.x;
    result->u = sel.u;
    result->sets = sel.sets;
    result->converged = true;
    result->solve_count = sel.lasso_solve_count;
    *out = result;
    return LD_OK;
  });
}

void ld_solution_destroy(ld_solution* sol) { delete sol; }

double ld_solution_mu(const ld_solution* sol) { return sol ? sol->mu : 0.0; }

int ld_solution_converged(const ld_solution* sol) {
  return sol && sol->converged ? 1 : 0;
}

int ld_solution_solve_count(const ld_solution* sol) {
  return sol ? sol->solve_count : 0;
}

ld_status ld_solution_primal(const ld_solution* sol, double* x_re, double* x_im) {
  return guarded([&] {
    if (sol == nullptr || x_re == nullptr || x_im == nullptr)
      throw InvalidInput("null argument");
    from_cxvec(sol->x, x_re, x_im);
    return LD_OK;
  });
}

ld_status ld_solution_dual(const ld_solution* sol, double* u_re, double* u_im) {
  return guarded([&] {
    if (sol == nullptr || u_re == nullptr || u_im == nullptr)
      throw InvalidInput("null argument");
    from_cxvec(sol->u, u_re, u_im);
    return LD_OK;
  });
}

int ld_solution_active_count(const ld_solution* sol) {
  return sol ? static_cast<int>(sol->sets.primal.size()) : 0;
}

ld_status ld_solution_active_set(const ld_solution* sol, int* indices) {
  return guarded([&] {
    if (sol == nullptr || indices == nullptr) throw InvalidInput("null argument");
    for (std::size_t j = 0; j < sol->sets.primal.size(); ++j)
      indices[j] = sol->sets.primal[j];
    return LD_OK;
  });
}

int ld_solution_dual_active_count(const ld_solution* sol) {
  return sol ? static_cast<int>(sol->sets.dual.size()) : 0;
}

ld_status ld_solution_dual_active_set(const ld_solution* sol, int* indices) {
  return guarded([&] {
    if (sol == nullptr || indices == nullptr) throw InvalidInput("null argument");
    for (std::size_t j = 0; j < sol->sets.dual.size(); ++j)
      indices[j] = sol->sets.dual[j];
    return LD_OK;
  });
}

ld_status ld_run_task_json(const char* config_json, const char* out_dir,
                           char** result_json) {
  return guarded([&]() -> ld_status {
    if (config_json == nullptr) throw InvalidInput("config_json is null");
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("config: ") + e.what());
    }
    const ScenarioConfig config = ScenarioConfig::from_json(parsed);
    const RunOutcome outcome =
        run_task(config, out_dir == nullptr ? "" : std::string(out_dir));
    if (result_json != nullptr) *result_json = dup_string(outcome.record.dump(2));
    switch (outcome.exit_code) {
      case kExitOk:
        return LD_OK;
      case kExitNotConverged:
        return fail(LD_ERR_NOT_CONVERGED, "solver did not converge");
      case kExitK0Unreachable:
        return fail(LD_ERR_K0_UNREACHABLE, "requested sparsity order unreachable");
      case kExitAuditFailed:
        return fail(LD_ERR_AUDIT_FAILED, "KKT audit failed");
      default:
        return fail(LD_ERR_INTERNAL, "unexpected task exit code");
    }
  });
}

ld_status ld_builtin_scenario_json(const char* name, char** config_json) {
  return guarded([&] {
    if (name == nullptr || config_json == nullptr)
      throw InvalidInput("null argument");
    *config_json = dup_string(builtin_scenario(name).to_json().dump(2));
    return LD_OK;
  });
}

ld_status ld_builtin_scenario_names(char** names) {
  return guarded([&] {
    if (names == nullptr) throw InvalidInput("null argument");
    std::string joined;
    for (const auto& n : builtin_scenario_names()) {
      if (!joined.empty()) joined += '\n';
      joined += n;
    }
    *names = dup_string(joined);
    return LD_OK;
  });
}

void ld_string_free(char* s) { delete[] s; }

}  // extern "C"
