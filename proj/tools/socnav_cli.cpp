// Command-line front end. Talks to the library only through the C API.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "socnav/socnav.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Failure {
  int code;
  std::string message;
};

// Any non-OK status aborts the verb; config and argument problems map to exit 2.
void check(socnav_status st, const std::string& what) {
  if (st == SOCNAV_OK) return;
  const int code = (st == SOCNAV_ERR_CONFIG || st == SOCNAV_ERR_ARGUMENT) ? kExitConfig : kExitRuntime;
  throw Failure{code, what + ": " + socnav_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using ConfigH = Handle<socnav_config, socnav_config_free>;
using DatasetH = Handle<socnav_dataset, socnav_dataset_free>;
using PolicyH = Handle<socnav_policy, socnav_policy_free>;
using ReportH = Handle<socnav_report, socnav_report_free>;
using TrajH = Handle<socnav_trajectories, socnav_trajectories_free>;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void load_config(const Common& c, ConfigH& cfg) {
  if (c.config.empty()) {
    check(socnav_config_default(cfg.out()), "default config");
  } else {
    const auto st = socnav_config_load(c.config.c_str(), cfg.out());
    if (st != SOCNAV_OK) throw Failure{kExitConfig, std::string("config: ") + socnav_last_error()};
  }
  if (c.seed) check(socnav_config_set_seed(cfg.get(), *c.seed), "seed");
}

std::string out_path(const Common& c, const char* name) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Failure{kExitRuntime, "cannot create output directory " + c.out + ": " + ec.message()};
  return (fs::path(c.out) / name).string();
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config file (defaults apply to missing keys)");
  sub->add_option("--seed", c.seed, "override the config seed");
  sub->add_option("--out", c.out, "output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social navigation imitation learning toolkit"};
  app.require_subcommand(1);

  Common c;
  std::string dataset_path, train_path, eval_path, policy_path, trajectories_path;
  std::vector<std::string> policies;

  auto* gen = app.add_subcommand("gen-data", "generate the expert dataset");
  add_common(gen, c);

  auto* split = app.add_subcommand("split-data", "split a dataset into train and eval parts");
  add_common(split, c);
  split->add_option("--dataset", dataset_path, "dataset file")->required();

  auto* train_bc = app.add_subcommand("train-bc", "behavior cloning");
  add_common(train_bc, c);
  train_bc->add_option("--train", train_path, "training dataset")->required();
  train_bc->add_option("--eval", eval_path, "held-out dataset");

  auto* train_gail = app.add_subcommand("train-gail", "adversarial refinement of a policy");
  add_common(train_gail, c);
  train_gail->add_option("--train", train_path, "expert dataset")->required();
  train_gail->add_option("--policy", policy_path, "initial policy checkpoint")->required();

  auto* ev = app.add_subcommand("eval", "evaluate policies on the seeded scenario ladder");
  add_common(ev, c);
  ev->add_option("--policy", policies, "TAG=CHECKPOINT, repeatable; the first tag is the reference")->required();

  auto* render = app.add_subcommand("render", "draw a trajectory file as SVG");
  add_common(render, c);
  render->add_option("--trajectories", trajectories_path, "trajectory file")->required();

  auto* simulate = app.add_subcommand("simulate", "expert-only rollouts");
  add_common(simulate, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    ConfigH cfg;
    load_config(c, cfg);

    if (gen->parsed()) {
      DatasetH d;
      check(socnav_dataset_generate(cfg.get(), d.out()), "gen-data");
      check(socnav_dataset_save(d.get(), out_path(c, "dataset.txt").c_str()), "gen-data");
    } else if (split->parsed()) {
      DatasetH d, tr, evd;
      check(socnav_dataset_load(dataset_path.c_str(), d.out()), "split-data");
      check(socnav_dataset_split(cfg.get(), d.get(), tr.out(), evd.out()), "split-data");
      check(socnav_dataset_save(tr.get(), out_path(c, "train.txt").c_str()), "split-data");
      check(socnav_dataset_save(evd.get(), out_path(c, "eval.txt").c_str()), "split-data");
    } else if (train_bc->parsed()) {
      DatasetH tr, evd;
      check(socnav_dataset_load(train_path.c_str(), tr.out()), "train-bc");
      if (!eval_path.empty()) check(socnav_dataset_load(eval_path.c_str(), evd.out()), "train-bc");
      PolicyH p;
      check(socnav_bc_train(cfg.get(), tr.get(), evd.get(), out_path(c, "bc_loss.csv").c_str(), p.out()), "train-bc");
      check(socnav_policy_save(p.get(), out_path(c, "bc_policy.txt").c_str()), "train-bc");
    } else if (train_gail->parsed()) {
      DatasetH tr;
      PolicyH init, p;
      check(socnav_dataset_load(train_path.c_str(), tr.out()), "train-gail");
      check(socnav_policy_load(policy_path.c_str(), init.out()), "train-gail");
      check(socnav_gail_train(cfg.get(), init.get(), tr.get(), out_path(c, "gail_diagnostics.csv").c_str(),
                              out_path(c, "gail_critic.txt").c_str(), p.out()),
            "train-gail");
      check(socnav_policy_save(p.get(), out_path(c, "gail_policy.txt").c_str()), "train-gail");
    } else if (ev->parsed()) {
      std::vector<std::string> tags;
      std::vector<PolicyH> handles(policies.size());
      for (std::size_t i = 0; i < policies.size(); ++i) {
        const auto eq = policies[i].find('=');
        if (eq == std::string::npos || eq == 0) throw Failure{kExitConfig, "--policy expects TAG=CHECKPOINT"};
        tags.push_back(policies[i].substr(0, eq));
        check(socnav_policy_load(policies[i].substr(eq + 1).c_str(), handles[i].out()), "eval");
      }
      std::vector<const socnav_policy*> ptrs;
      std::vector<const char*> tag_ptrs;
      for (std::size_t i = 0; i < handles.size(); ++i) {
        ptrs.push_back(handles[i].get());
        tag_ptrs.push_back(tags[i].c_str());
      }
      ReportH rep;
      TrajH trajs;
      check(socnav_eval_run(cfg.get(), ptrs.data(), tag_ptrs.data(), ptrs.size(), rep.out(), trajs.out()), "eval");
      check(socnav_report_normalize(rep.get(), tag_ptrs[0]), "eval");
      check(socnav_report_save_csv(rep.get(), out_path(c, "episodes.csv").c_str(), out_path(c, "summary.csv").c_str()),
            "eval");
      check(socnav_trajectories_save(trajs.get(), out_path(c, "trajectories.txt").c_str()), "eval");
      check(socnav_trajectories_render_svg(trajs.get(), out_path(c, "trajectories.svg").c_str()), "eval");
      for (const auto& t : tags) {
        double rate = 0.0;
        check(socnav_report_goal_rate(rep.get(), t.c_str(), &rate), "eval");
        std::printf("%s goal_rate %.3f\n", t.c_str(), rate);
      }
    } else if (render->parsed()) {
      TrajH trajs;
      check(socnav_trajectories_load(trajectories_path.c_str(), trajs.out()), "render");
      check(socnav_trajectories_render_svg(trajs.get(), out_path(c, "render.svg").c_str()), "render");
    } else if (simulate->parsed()) {
      ReportH rep;
      TrajH trajs;
      check(socnav_simulate_expert(cfg.get(), rep.out(), trajs.out()), "simulate");
      check(socnav_report_save_csv(rep.get(), out_path(c, "episodes.csv").c_str(), out_path(c, "summary.csv").c_str()),
            "simulate");
      check(socnav_trajectories_save(trajs.get(), out_path(c, "trajectories.txt").c_str()), "simulate");
      check(socnav_trajectories_render_svg(trajs.get(), out_path(c, "trajectories.svg").c_str()), "simulate");
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
