// rctgan command line: fit / sample / evaluate / experiment / inspect.
//
// Every option doubles as a config-file key (flat key=value, '#' comments,
// loaded with --config); command-line flags override file values and unknown
// keys are rejected. --help-all lists every key with its default.

#include <CLI11.hpp>

#include <fstream>

#include "rctgan/cli/commands.hpp"

using namespace rctgan;

namespace {

// Splices `--config FILE` out of the args and inserts the file's keys as
// `--key=value` tokens right after the subcommand, so command-line flags
// (later tokens, TakeLast policy) override file values and unknown keys are
// rejected by the normal parser.
std::vector<std::string> expand_config_args(std::vector<std::string> args) {
    std::string config_path;
    for (size_t i = 0; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
        } else {
            ++i;
        }
    }
    if (config_path.empty() || args.empty()) return args;
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open config file '" + config_path + "'");
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        tokens.push_back("--" + line.substr(first, last - first + 1));
    }
    args.insert(args.begin() + 1, tokens.begin(), tokens.end());
    return args;
}

void add_data_options(CLI::App* cmd, cli::DataOptions& d, bool require) {
    auto* data = cmd->add_option("--data", d.data_path, "input CSV path");
    if (require) data->required();
    cmd->add_option("--layout", d.layout, "CSV layout")
        ->check(CLI::IsMember({"generic", "backblaze"}))
        ->capture_default_str();
    cmd->add_option("--target", d.target,
                    "class column name (generic layout; backblaze uses 'failure')");
    cmd->add_option("--model", d.model_filter, "backblaze: keep only this disk model")
        ->capture_default_str();
}

void add_gan_options(CLI::App* cmd, GanConfig& g, std::string& mode) {
    cmd->add_option("--mode", mode, "gan variant (ctgan disables classifier + residual critic)")
        ->check(CLI::IsMember({"rctgan", "ctgan"}))
        ->capture_default_str();
    cmd->add_option("--epochs", g.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch-size", g.batch_size, "rows per training step")
        ->capture_default_str();
    cmd->add_option("--pac", g.pac, "rows packed per critic sample")->capture_default_str();
    cmd->add_option("--noise-dim", g.noise_dim, "generator noise width")
        ->capture_default_str();
    cmd->add_option("--lr", g.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--gp-lambda", g.gp_lambda, "gradient penalty weight")
        ->capture_default_str();
    cmd->add_option("--gumbel-tau", g.gumbel_tau, "Gumbel-softmax temperature")
        ->capture_default_str();
    cmd->add_option("--gen-width", g.gen_width, "generator residual block width")
        ->capture_default_str();
    cmd->add_option("--critic-width", g.critic_width, "critic residual block width")
        ->capture_default_str();
    cmd->add_option("--critic-residual", g.critic_residual,
                    "critic skip connections (rctgan mode)")
        ->capture_default_str();
    cmd->add_option("--gen-ema", g.gen_ema, "sample from EMA generator weights")
        ->capture_default_str();
    cmd->add_option("--ema-decay", g.ema_decay, "EMA decay per generator step")
        ->capture_default_str();
}

GanMode parse_mode(const std::string& s) {
    return s == "ctgan" ? GanMode::ctgan : GanMode::rctgan;
}

void add_bench_options(CLI::App* cmd, cli::BenchOptions& b, std::string& mode,
                       std::string& ratio) {
    cmd->add_flag("--synthetic-benchmark", b.synthetic,
                  "use the built-in synthetic benchmark instead of --data");
    add_data_options(cmd, b.data, /*require=*/false);
    cmd->add_option("--rows", b.rows, "synthetic benchmark row count")
        ->capture_default_str();
    cmd->add_option("--ratio", ratio, "imbalance ratio, e.g. 1:100 or 100")
        ->capture_default_str();
    cmd->add_option("--separation", b.separation, "synthetic benchmark cluster separation")
        ->capture_default_str();
    cmd->add_option("--seeds", b.n_seeds, "seeds per experiment cell")
        ->capture_default_str();
    cmd->add_option("--seed", b.seed, "global seed")->capture_default_str();
    cmd->add_option("--policy", b.policy, "mixing policy")
        ->check(CLI::IsMember({"parity", "literal-1to1"}))
        ->capture_default_str();
    cmd->add_option("--jobs", b.jobs, "parallel experiment cells")->capture_default_str();
    cmd->add_option("--out", b.out_dir, "output directory for reports/curves");
    cmd->add_option("--mlp-epochs", b.mlp_epochs, "downstream MLP epochs")
        ->capture_default_str();
    cmd->add_option("--rf-trees", b.rf_trees, "random forest size")->capture_default_str();
    add_gan_options(cmd, b.gan, mode);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RCTGAN: minority-class synthesis for imbalanced tables"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "print help for every subcommand");
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    // fit
    cli::FitOptions fit_opt;
    std::string fit_mode = "rctgan";
    auto* fit_cmd = app.add_subcommand("fit", "train a model on a CSV table");
    fit_cmd->add_option("--config", "key=value config file; flags override");
    add_data_options(fit_cmd, fit_opt.data, /*require=*/true);
    add_gan_options(fit_cmd, fit_opt.gan, fit_mode);
    fit_cmd->add_option("--seed", fit_opt.seed, "training seed")->capture_default_str();
    fit_cmd->add_option("--max-modes", fit_opt.max_modes, "max mixture modes per column")
        ->capture_default_str();
    fit_cmd->add_option("--out", fit_opt.out_dir, "output directory")
        ->capture_default_str();

    // sample
    cli::SampleOptions sample_opt;
    auto* sample_cmd = app.add_subcommand("sample", "synthesize rows from a checkpoint");
    sample_cmd->add_option("--config", "key=value config file; flags override");
    sample_cmd->add_option("--ckpt", sample_opt.ckpt_path, "checkpoint path")->required();
    sample_cmd->add_option("--class", sample_opt.cls, "target category to synthesize")
        ->required();
    sample_cmd->add_option("--count", sample_opt.count, "rows to synthesize")
        ->capture_default_str();
    sample_cmd->add_option("--seed", sample_opt.seed, "sampling seed")
        ->capture_default_str();
    sample_cmd->add_option("--out", sample_opt.out_path, "output CSV (default stdout)");

    // evaluate
    cli::BenchOptions eval_opt;
    std::string eval_mode = "rctgan", eval_ratio = "1:100";
    std::string eval_strategy = "rctgan", eval_classifier = "dt";
    auto* eval_cmd = app.add_subcommand("evaluate", "single strategy x classifier G-mean");
    eval_cmd->add_option("--config", "key=value config file; flags override");
    add_bench_options(eval_cmd, eval_opt, eval_mode, eval_ratio);
    eval_cmd->add_option("--strategy", eval_strategy, "augmentation strategy")
        ->check(CLI::IsMember({"none", "smote", "ctgan", "rctgan"}))
        ->capture_default_str();
    eval_cmd->add_option("--classifier", eval_classifier, "downstream classifier")
        ->check(CLI::IsMember({"dt", "rf", "mlp"}))
        ->capture_default_str();

    // experiment
    cli::BenchOptions exp_opt;
    std::string exp_mode = "rctgan", exp_ratio = "1:100";
    std::vector<std::string> exp_strategies, exp_classifiers;
    auto* exp_cmd =
        app.add_subcommand("experiment", "full strategy x classifier x seed matrix");
    exp_cmd->add_option("--config", "key=value config file; flags override");
    add_bench_options(exp_cmd, exp_opt, exp_mode, exp_ratio);
    exp_cmd->add_option("--strategies", exp_strategies, "strategies to run")
        ->delimiter(',');
    exp_cmd->add_option("--classifiers", exp_classifiers, "classifiers to run")
        ->delimiter(',');

    // inspect
    std::string inspect_path;
    auto* inspect_cmd = app.add_subcommand("inspect", "print checkpoint metadata");
    inspect_cmd->add_option("--ckpt", inspect_path, "checkpoint path")->required();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config_args(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11's vector parse pops from the back
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return cli::kExitIo;
    }

    if (fit_cmd->parsed()) {
        fit_opt.gan.mode = parse_mode(fit_mode);
        return cli::cmd_fit(fit_opt);
    }
    if (sample_cmd->parsed()) return cli::cmd_sample(sample_opt);
    if (eval_cmd->parsed()) {
        eval_opt.gan.mode = parse_mode(eval_mode);
        eval_opt.ratio = cli::parse_ratio(eval_ratio);
        return cli::cmd_evaluate(eval_opt, eval_strategy, eval_classifier);
    }
    if (exp_cmd->parsed()) {
        exp_opt.gan.mode = parse_mode(exp_mode);
        exp_opt.ratio = cli::parse_ratio(exp_ratio);
        if (!exp_strategies.empty()) exp_opt.strategies = exp_strategies;
        if (!exp_classifiers.empty()) exp_opt.classifiers = exp_classifiers;
        return cli::cmd_experiment(exp_opt);
    }
    if (inspect_cmd->parsed()) return cli::cmd_inspect(inspect_path);
    return cli::kExitUsage;
}
