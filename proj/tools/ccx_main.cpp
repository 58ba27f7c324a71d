// ccx: contact-complexity scoring pipeline.
//
// Subcommands: gen, train, score, route, eval, report.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccx/cli.hpp"

namespace {

std::vector<double> parse_weights(const std::string& csv_list) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv_list + ",") {
        if (c == ',') {
            if (!cur.empty()) {
                try {
                    out.push_back(std::stod(cur));
                } catch (const std::exception&) {
                    throw ccx::config_error("bad weight \"" + cur + "\" in --weights");
                }
                cur.clear();
            }
        } else {
            cur += c;
        }
    }
    if (out.empty()) throw ccx::config_error("--weights needs at least one value");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contact-complexity scoring pipeline"};
    app.require_subcommand(1);

    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::string corpus, model, out, labels, scores;
    double t_lo = 0.05, t_hi = 0.95;
    std::int64_t traces = 3;
    std::string weights = "1,2,3";

    auto* gen = app.add_subcommand("gen", "generate a synthetic corpus and its labels");
    gen->add_option("--config", config, "synthetic generator config (key = value)");
    gen->add_option("--out", out, "output corpus JSONL path")->required();
    gen->add_option("--labels", labels, "output labels CSV path (default: <out>.labels.csv)");
    gen->add_option("--seed", seed, "override the generator seed");

    auto* train = app.add_subcommand("train", "train the expert and fit the scorer");
    train->add_option("--corpus", corpus, "training corpus JSONL")->required();
    train->add_option("--config", config, "training config (key = value)");
    train->add_option("--out", out, "output model file")->required();
    train->add_option("--seed", seed, "override the training seed");

    auto* score = app.add_subcommand("score", "score a corpus with a trained model");
    score->add_option("--model", model, "model file")->required();
    score->add_option("--corpus", corpus, "corpus JSONL")->required();
    score->add_option("--out", out, "output score CSV")->required();

    auto* route = app.add_subcommand("route", "route contacts by relative score");
    route->add_option("--model", model, "model file")->required();
    route->add_option("--corpus", corpus, "corpus JSONL")->required();
    route->add_option("--config", config, "routing config (key = value)");
    route->add_option("--out", out, "output routing CSV")->required();

    auto* eval = app.add_subcommand("eval", "evaluate scores against labels and outcomes");
    eval->add_option("--scores", scores, "score CSV from the score command")->required();
    eval->add_option("--labels", labels, "labels CSV (id,label)")->required();
    eval->add_option("--corpus", corpus, "corpus JSONL")->required();
    eval->add_option("--out", out, "output directory")->required();
    eval->add_option("--t-lo", t_lo, "low-complexity threshold (default 0.05)");
    eval->add_option("--t-hi", t_hi, "high-complexity threshold (default 0.95)");

    auto* report = app.add_subcommand("report", "boosting traces, distributions, skewness sweep");
    report->add_option("--model", model, "model file")->required();
    report->add_option("--corpus", corpus, "corpus JSONL")->required();
    report->add_option("--out", out, "output directory")->required();
    report->add_option("--traces", traces, "number of per-contact trace CSVs (default 3)");
    report->add_option("--weights", weights, "length weights to sweep (default 1,2,3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            std::string labels_path = labels.empty() ? out + ".labels.csv" : labels;
            ccx::cli::cmd_gen(config, out, labels_path, seed, std::cout);
        } else if (train->parsed()) {
            ccx::cli::cmd_train(corpus, config, out, seed, std::cout);
        } else if (score->parsed()) {
            ccx::cli::cmd_score(model, corpus, out, std::cout);
        } else if (route->parsed()) {
            ccx::cli::cmd_route(model, corpus, config, out, std::cout, std::cerr);
        } else if (eval->parsed()) {
            ccx::cli::cmd_eval(scores, labels, corpus, out, t_lo, t_hi, std::cout);
        } else if (report->parsed()) {
            ccx::cli::cmd_report(model, corpus, out, traces, parse_weights(weights), std::cout);
        }
    } catch (const ccx::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
