#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coldspray/cli.hpp"
#include "coldspray/numeric.hpp"

namespace {

/// Adapter so --config accepts a flat JSON object of flag values
/// ({"n": 100, "seed": 7}) with the same semantics as the flags.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        nlohmann::ordered_json j;
        for (const CLI::Option* opt : app->get_options()) {
            if (!opt->get_lnames().empty() && opt->get_configurable()) {
                const std::string name = opt->get_lnames()[0];
                if (opt->count() > 0) {
                    j[name] = opt->results().size() == 1 ? nlohmann::ordered_json(opt->results()[0])
                                                         : nlohmann::ordered_json(opt->results());
                } else if (default_also) {
                    j[name] = opt->get_default_str();
                }
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j = nlohmann::json::parse(input);
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            CLI::ConfigItem item;
            item.name = key;
            if (value.is_array()) {
                for (const auto& element : value) {
                    item.inputs.push_back(element.is_string() ? element.get<std::string>()
                                                              : element.dump());
                }
            } else if (value.is_string()) {
                item.inputs.push_back(value.get<std::string>());
            } else {
                item.inputs.push_back(value.dump());
            }
            items.push_back(std::move(item));
        }
        return items;
    }
};

void add_config_option(CLI::App* app) {
    app->set_config("--config", "", "JSON file with the same keys as the long flags");
    app->config_formatter(std::make_shared<JsonConfig>());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-based surrogate models for cold spray impact responses"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("coldspray ") + coldspray::kToolkitVersion);

    coldspray::cli::GenerateCmd generate_cmd;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic dataset CSV");
    generate->add_option("--n", generate_cmd.n, "Number of samples")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    generate->add_option("--seed", generate_cmd.seed, "Sampling / noise seed")->capture_default_str();
    generate->add_option("--noise", generate_cmd.noise, "Relative noise std per target")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    generate->add_option("--out", generate_cmd.out, "Output CSV path")->required();
    add_config_option(generate);

    coldspray::cli::TrainCmd train_cmd;
    auto* train = app.add_subcommand("train", "Train one model or the full family x target grid");
    train->add_option("--data", train_cmd.data, "Dataset CSV")->required();
    train->add_option("--family", train_cmd.family, "graphsage|chebspectral|tdamlp|gat|all")
        ->capture_default_str();
    train->add_option("--target", train_cmd.target, "Target column name or 'all'")->capture_default_str();
    train->add_option("--k", train_cmd.k, "kNN neighbor count")->check(CLI::PositiveNumber)->capture_default_str();
    train->add_option("--test-frac", train_cmd.test_fraction, "Held-out fraction")->capture_default_str();
    train->add_option("--seed", train_cmd.seed, "Split / init seed")->capture_default_str();
    train->add_option("--epochs", train_cmd.epochs, "Max training epochs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    train->add_option("--lr", train_cmd.learning_rate, "Adam learning rate")->capture_default_str();
    train->add_option("--out", train_cmd.out, "Output directory")->required();
    add_config_option(train);

    coldspray::cli::EvaluateCmd evaluate_cmd;
    auto* evaluate = app.add_subcommand("evaluate", "Metrics for saved checkpoints on a dataset");
    evaluate->add_option("--checkpoints", evaluate_cmd.checkpoints, "Checkpoint JSON paths")->required();
    evaluate->add_option("--data", evaluate_cmd.data, "Dataset CSV")->required();
    evaluate->add_option("--out", evaluate_cmd.out, "Output directory")->capture_default_str();
    evaluate->add_flag("--json", evaluate_cmd.json_stdout, "Print the metrics JSON to stdout");
    add_config_option(evaluate);

    coldspray::cli::SurfaceCmd surface_cmd;
    auto* surface = app.add_subcommand("surface", "Export a 2-D prediction grid with one input fixed");
    surface->add_option("--checkpoint", surface_cmd.checkpoint, "Checkpoint JSON path")->required();
    surface->add_option("--fix", surface_cmd.fix, "<param>=<value|median>")->required();
    surface->add_option("--grid", surface_cmd.grid, "Grid points per free axis")->capture_default_str();
    surface->add_option("--out", surface_cmd.out, "Output CSV path")->required();
    add_config_option(surface);

    coldspray::cli::PredictCmd predict_cmd;
    auto* predict = app.add_subcommand("predict", "Predict one point from a checkpoint");
    predict->add_option("--checkpoint", predict_cmd.checkpoint, "Checkpoint JSON path")->required();
    predict->add_option("--velocity", predict_cmd.velocity, "m/s")->required();
    predict->add_option("--temp", predict_cmd.particle_temp, "K")->required();
    predict->add_option("--friction", predict_cmd.friction, "dimensionless")->required();
    add_config_option(predict);

    try {
        app.parse(argc, argv);
        if (generate->parsed()) {
            coldspray::cli::run_generate(generate_cmd);
        } else if (train->parsed()) {
            coldspray::cli::run_train(train_cmd);
        } else if (evaluate->parsed()) {
            coldspray::cli::run_evaluate(evaluate_cmd, std::cout);
        } else if (surface->parsed()) {
            coldspray::cli::run_surface(surface_cmd);
        } else if (predict->parsed()) {
            coldspray::cli::run_predict(predict_cmd, std::cout);
        }
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const coldspray::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return coldspray::cli::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
