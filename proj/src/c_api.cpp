#include "socnav/socnav.h"

#include <memory>
#include <new>
#include <string>

#include "io.hpp"
#include "socnav/config.hpp"

using namespace socnav;

struct socnav_config {
  Config cfg;
};
struct socnav_dataset {
  dataset::Dataset data;
};
struct socnav_policy {
  net::Checkpoint ckpt;
};
struct socnav_report {
  eval::EvalReport report;
};
struct socnav_trajectories {
  std::vector<gail::Trajectory> trajs;
};

namespace {

thread_local std::string g_last_error;

struct ArgumentError : Error {
  using Error::Error;
};

template <typename F>
socnav_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SOCNAV_OK;
  } catch (const ArgumentError& e) {
    g_last_error = e.what();
    return SOCNAV_ERR_ARGUMENT;
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    return SOCNAV_ERR_CONFIG;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return SOCNAV_ERR_IO;
  } catch (const ParseError& e) {
    g_last_error = e.what();
    return SOCNAV_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SOCNAV_ERR_RUNTIME;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SOCNAV_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return SOCNAV_ERR_RUNTIME;
  }
}

template <typename T>
const T& need(const T* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " is null");
  return *p;
}

template <typename T>
T& need(T* p, const char* what) {
  if (!p) throw ArgumentError(std::string(what) + " is null");
  return *p;
}

std::string text(const char* s, const char* what) {
  if (!s) throw ArgumentError(std::string(what) + " is null");
  return s;
}

template <typename H, typename V>
void emit(H** out, V&& value) {
  if (!out) throw ArgumentError("output pointer is null");
  *out = new H{std::forward<V>(value)};
}

}  // namespace

extern "C" {

const char* socnav_last_error(void) { return g_last_error.c_str(); }
const char* socnav_version(void) { return "1.0.0"; }

socnav_status socnav_config_default(socnav_config** out) {
  return guard([&] { emit(out, Config{}); });
}

socnav_status socnav_config_load(const char* path, socnav_config** out) {
  return guard([&] { emit(out, load_config(text(path, "path"))); });
}

socnav_status socnav_config_save(const socnav_config* cfg, const char* path) {
  return guard([&] {
    io::write_file(text(path, "path"), format_config(need(cfg, "config").cfg));
  });
}

socnav_status socnav_config_set_seed(socnav_config* cfg, uint64_t seed) {
  return guard([&] { need(cfg, "config").cfg.seed = seed; });
}

socnav_status socnav_config_get_seed(const socnav_config* cfg, uint64_t* seed) {
  return guard([&] { need(seed, "seed") = need(cfg, "config").cfg.seed; });
}

void socnav_config_free(socnav_config* cfg) { delete cfg; }

socnav_status socnav_dataset_generate(const socnav_config* cfg, socnav_dataset** out) {
  return guard([&] { emit(out, dataset::generate_expert_dataset(need(cfg, "config").cfg.dataset_config())); });
}

socnav_status socnav_dataset_load(const char* path, socnav_dataset** out) {
  return guard([&] { emit(out, dataset::load_dataset(text(path, "path"))); });
}

socnav_status socnav_dataset_save(const socnav_dataset* d, const char* path) {
  return guard([&] { dataset::save_dataset(need(d, "dataset").data, text(path, "path")); });
}

socnav_status socnav_dataset_size(const socnav_dataset* d, size_t* size) {
  return guard([&] { need(size, "size") = need(d, "dataset").data.size(); });
}

socnav_status socnav_dataset_split(const socnav_config* cfg, const socnav_dataset* d, socnav_dataset** train,
                                   socnav_dataset** eval) {
  return guard([&] {
    const auto& c = need(cfg, "config").cfg;
    if (!train || !eval) throw ArgumentError("output pointer is null");
    auto [tr, ev] = dataset::split_dataset(need(d, "dataset").data, c.eval_count, c.split_seed());
    auto t = std::make_unique<socnav_dataset>(socnav_dataset{std::move(tr)});
    *eval = new socnav_dataset{std::move(ev)};
    *train = t.release();
  });
}

void socnav_dataset_free(socnav_dataset* d) { delete d; }

socnav_status socnav_bc_train(const socnav_config* cfg, const socnav_dataset* train, const socnav_dataset* eval,
                              const char* loss_csv_path, socnav_policy** out) {
  return guard([&] {
    const auto& c = need(cfg, "config").cfg;
    if (!out) throw ArgumentError("output pointer is null");
    const auto& tr = need(train, "train dataset").data;
    const dataset::Dataset empty{tr.meta, {}};
    auto r = bc::train_bc(tr, eval ? eval->data : empty, c.bc_config());
    if (loss_csv_path) io::write_file(loss_csv_path, bc::loss_curve_csv(r.curve));
    *out = new socnav_policy{{r.spec, r.params}};
  });
}

socnav_status socnav_gail_train(const socnav_config* cfg, const socnav_policy* initial, const socnav_dataset* expert,
                                const char* diagnostics_csv_path, const char* critic_path, socnav_policy** out) {
  return guard([&] {
    const auto& c = need(cfg, "config").cfg;
    if (!out) throw ArgumentError("output pointer is null");
    const auto& init = need(initial, "initial policy").ckpt;
    auto r = gail::train_gail(init.spec, init.params, need(expert, "expert dataset").data, c.gail_config(), c.env);
    if (diagnostics_csv_path) io::write_file(diagnostics_csv_path, gail::diagnostics_csv(r.diagnostics));
    if (critic_path) net::save_checkpoint({r.disc_spec, r.disc}, critic_path);
    *out = new socnav_policy{{r.policy_spec, r.policy}};
  });
}

socnav_status socnav_policy_load(const char* path, socnav_policy** out) {
  return guard([&] { emit(out, net::load_checkpoint(text(path, "path"))); });
}

socnav_status socnav_policy_save(const socnav_policy* p, const char* path) {
  return guard([&] { net::save_checkpoint(need(p, "policy").ckpt, text(path, "path")); });
}

void socnav_policy_free(socnav_policy* p) { delete p; }

socnav_status socnav_eval_run(const socnav_config* cfg, const socnav_policy* const* policies, const char* const* tags,
                              size_t count, socnav_report** report, socnav_trajectories** trajectories) {
  return guard([&] {
    const auto& c = need(cfg, "config").cfg;
    if (!report) throw ArgumentError("output pointer is null");
    if (count > 0 && (!policies || !tags)) throw ArgumentError("policies or tags is null");
    std::vector<eval::PolicyEntry> entries;
    for (size_t i = 0; i < count; ++i) {
      const auto& p = need(policies[i], "policy").ckpt;
      entries.push_back({text(tags[i], "tag"), p.spec, p.params});
    }
    std::vector<gail::Trajectory> trajs;
    auto r = eval::run_eval(entries, c.eval, c.env, trajectories ? &trajs : nullptr);
    auto rep = std::make_unique<socnav_report>(socnav_report{std::move(r)});
    if (trajectories) *trajectories = new socnav_trajectories{std::move(trajs)};
    *report = rep.release();
  });
}

socnav_status socnav_simulate_expert(const socnav_config* cfg, socnav_report** report,
                                     socnav_trajectories** trajectories) {
  return guard([&] {
    const auto& c = need(cfg, "config").cfg;
    if (!report) throw ArgumentError("output pointer is null");
    std::vector<gail::Trajectory> trajs;
    auto r = eval::run_expert(c.eval, c.env, trajectories ? &trajs : nullptr);
    auto rep = std::make_unique<socnav_report>(socnav_report{std::move(r)});
    if (trajectories) *trajectories = new socnav_trajectories{std::move(trajs)};
    *report = rep.release();
  });
}

socnav_status socnav_report_normalize(socnav_report* report, const char* reference_tag) {
  return guard([&] {
    auto& r = need(report, "report");
    r.report = eval::normalize_report(r.report, text(reference_tag, "reference tag"));
  });
}

socnav_status socnav_report_save_csv(const socnav_report* report, const char* episodes_path,
                                     const char* summary_path) {
  return guard([&] {
    const auto& r = need(report, "report").report;
    if (episodes_path) io::write_file(episodes_path, eval::episodes_csv(r));
    if (summary_path) io::write_file(summary_path, eval::summary_csv(r));
  });
}

socnav_status socnav_report_goal_rate(const socnav_report* report, const char* tag, double* rate) {
  return guard([&] { need(rate, "rate") = eval::goal_rate(need(report, "report").report, text(tag, "tag")); });
}

socnav_status socnav_report_min_dist(const socnav_report* report, const char* tag, const char* scenario,
                                     double* mean) {
  return guard([&] {
    const auto id = scenario::parse_scenario(text(scenario, "scenario"));
    if (!id) throw ArgumentError(std::string("unknown scenario '") + scenario + "'");
    const auto* s = need(report, "report").report.find(text(tag, "tag"), *id);
    if (!s || !s->min_dist) throw ArgumentError("no min-dist for that policy and scenario");
    need(mean, "mean") = s->min_dist->mean;
  });
}

void socnav_report_free(socnav_report* report) { delete report; }

socnav_status socnav_trajectories_load(const char* path, socnav_trajectories** out) {
  return guard([&] { emit(out, eval::load_trajectories(text(path, "path"))); });
}

socnav_status socnav_trajectories_save(const socnav_trajectories* t, const char* path) {
  return guard([&] { eval::save_trajectories(need(t, "trajectories").trajs, text(path, "path")); });
}

socnav_status socnav_trajectories_count(const socnav_trajectories* t, size_t* count) {
  return guard([&] { need(count, "count") = need(t, "trajectories").trajs.size(); });
}

socnav_status socnav_trajectories_render_svg(const socnav_trajectories* t, const char* path) {
  return guard([&] { eval::save_svg(need(t, "trajectories").trajs, text(path, "path")); });
}

void socnav_trajectories_free(socnav_trajectories* t) { delete t; }

}  // extern "C"
