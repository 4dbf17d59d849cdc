#pragma once
// All GAN hyperparameters, with text serialization for checkpoints and
// config files (flat key=value, '#' comments).

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "rctgan/errors.hpp"

namespace rctgan {

enum class GanMode : uint8_t { rctgan, ctgan };

struct GanConfig {
    int noise_dim = 128;
    int pac = 10;
    int batch_size = 500;
    double lr = 2e-4;
    double beta1 = 0.5;   // Adam betas for adversarial training
    double beta2 = 0.9;
    int epochs = 300;
    double gp_lambda = 10.0;
    double gumbel_tau = 0.2;
    int gen_blocks = 2;
    int gen_width = 256;
    int critic_blocks = 2;
    int critic_width = 256;
    bool critic_residual = true;  // ablation toggle; forced off in ctgan mode
    std::vector<int> clf_hidden = {256, 128};
    double clf_dropout = 0.5;
    double clf_leaky = 0.2;
    bool gen_ema = true;      // sample from an EMA of generator weights
    double ema_decay = 0.995;  // per-generator-step decay
    double class_weight = 1.0;  // generator-side classifier CE weight (rctgan)
    GanMode mode = GanMode::rctgan;

    void validate() const {
        if (noise_dim <= 0 || pac <= 0 || batch_size <= 0 || gen_width <= 0 ||
            critic_width <= 0 || gen_blocks <= 0 || critic_blocks <= 0)
            throw DataError("gan config: dimensions must be positive");
        if (batch_size % pac != 0)
            throw DataError("gan config: batch_size must be divisible by pac");
        if (epochs < 0) throw DataError("gan config: negative epochs");
        if (!(gumbel_tau > 0.0)) throw DataError("gan config: gumbel_tau must be > 0");
        if (gp_lambda < 0.0) throw DataError("gan config: negative gp_lambda");
    }

    bool classifier_enabled() const { return mode == GanMode::rctgan; }
    bool residual_critic() const { return mode == GanMode::rctgan && critic_residual; }

    std::string to_text() const {
        std::ostringstream os;
        char buf[40];
        auto g = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        os << "noise_dim=" << noise_dim << "\n";
        os << "pac=" << pac << "\n";
        os << "batch_size=" << batch_size << "\n";
        os << "lr=" << g(lr) << "\n";
        os << "beta1=" << g(beta1) << "\n";
        os << "beta2=" << g(beta2) << "\n";
        os << "epochs=" << epochs << "\n";
        os << "gp_lambda=" << g(gp_lambda) << "\n";
        os << "gumbel_tau=" << g(gumbel_tau) << "\n";
        os << "gen_blocks=" << gen_blocks << "\n";
        os << "gen_width=" << gen_width << "\n";
        os << "critic_blocks=" << critic_blocks << "\n";
        os << "critic_width=" << critic_width << "\n";
        os << "critic_residual=" << (critic_residual ? 1 : 0) << "\n";
        os << "clf_hidden=";
        for (size_t i = 0; i < clf_hidden.size(); ++i)
            os << (i ? "," : "") << clf_hidden[i];
        os << "\n";
        os << "clf_dropout=" << g(clf_dropout) << "\n";
        os << "clf_leaky=" << g(clf_leaky) << "\n";
        os << "gen_ema=" << (gen_ema ? 1 : 0) << "\n";
        os << "class_weight=" << g(class_weight) << "\n";
        os << "ema_decay=" << g(ema_decay) << "\n";
        os << "mode=" << (mode == GanMode::rctgan ? "rctgan" : "ctgan") << "\n";
        return os.str();
    }

    static GanConfig from_text(const std::string& text) {
        GanConfig cfg;
        std::istringstream is(text);
        std::string line;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw DataError("gan config: bad line '" + line + "'");
            const std::string key = line.substr(0, eq);
            const std::string val = line.substr(eq + 1);
            if (!cfg.set(key, val)) throw DataError("gan config: unknown key '" + key + "'");
        }
        cfg.validate();
        return cfg;
    }

    bool set(const std::string& key, const std::string& val) {
        auto as_int = [&] { return std::stoi(val); };
        auto as_dbl = [&] { return std::stod(val); };
        if (key == "noise_dim") noise_dim = as_int();
        else if (key == "pac") pac = as_int();
        else if (key == "batch_size") batch_size = as_int();
        else if (key == "lr") lr = as_dbl();
        else if (key == "beta1") beta1 = as_dbl();
        else if (key == "beta2") beta2 = as_dbl();
        else if (key == "epochs") epochs = as_int();
        else if (key == "gp_lambda") gp_lambda = as_dbl();
        else if (key == "gumbel_tau") gumbel_tau = as_dbl();
        else if (key == "gen_blocks") gen_blocks = as_int();
        else if (key == "gen_width") gen_width = as_int();
        else if (key == "critic_blocks") critic_blocks = as_int();
        else if (key == "critic_width") critic_width = as_int();
        else if (key == "critic_residual") critic_residual = as_int() != 0;
        else if (key == "clf_dropout") clf_dropout = as_dbl();
        else if (key == "clf_leaky") clf_leaky = as_dbl();
        else if (key == "gen_ema") gen_ema = as_int() != 0;
        else if (key == "class_weight") class_weight = as_dbl();
        else if (key == "ema_decay") ema_decay = as_dbl();
        else if (key == "clf_hidden") {
            clf_hidden.clear();
            std::istringstream hs(val);
            std::string tok;
            while (std::getline(hs, tok, ',')) clf_hidden.push_back(std::stoi(tok));
        } else if (key == "mode") {
            if (val == "rctgan") mode = GanMode::rctgan;
            else if (val == "ctgan") mode = GanMode::ctgan;
            else throw DataError("gan config: unknown mode '" + val + "'");
        } else {
            return false;
        }
        return true;
    }
};

}  // namespace rctgan
