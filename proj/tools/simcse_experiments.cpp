// SPDX-License-Identifier: Apache-2.0
// Runs the comparison tables on synthetic data and prints their reports.
#include <CLI11.hpp>
#include <iostream>

#include "simcse/error.hpp"
#include "simcse/experiments.hpp"

int main(int argc, char** argv) {
    using namespace simcse;
    CLI::App app{"toy-scale experiment tables"};
    std::uint64_t seed = 42;
    int epochs = 3;
    std::string table = "all", format = "pretty";
    std::size_t size = 60;
    app.add_option("--seed", seed);
    app.add_option("--epochs", epochs, "epochs per training stage")->check(CLI::NonNegativeNumber);
    app.add_option("--size", size, "examples per synthetic dataset")->check(CLI::Range(8, 100000));
    app.add_option("--table", table)->check(CLI::IsMember({"all", "tasks", "dropout", "transfer", "two-tier"}));
    app.add_option("--format", format)->check(CLI::IsMember({"pretty", "tsv"}));
    CLI11_PARSE(app, argc, argv);

    ExperimentSetup setup;
    setup.encoder.hidden_dim = 16;
    setup.encoder.num_layers = 2;
    setup.encoder.num_heads = 2;
    setup.encoder.ffn_dim = 32;
    setup.encoder.max_seq_len = 24;
    setup.encoder.pooling = Pooling::mean;
    setup.base.epochs = epochs;
    setup.base.optim.lr = 1e-3;
    setup.base.seed = seed;
    setup.two_tier = TwoTierConfig::from_base(setup.base);
    setup.two_tier.unsup.batch_size = 16;
    setup.two_tier.unsup.optim.lr = 3e-4;
    setup.two_tier.sup.batch_size = 8;
    setup.two_tier.sup.optim.lr = 3e-4;
    setup.two_tier.sup.epochs = epochs;

    CorpusSizes sizes;
    sizes.sst = sizes.paraphrase = sizes.sts = size;
    sizes.triplets = size;
    const auto fmt = format == "tsv" ? ReportFormat::tsv : ReportFormat::pretty;
    try {
        const ToyCorpora data = make_toy_corpora(sizes, seed);
        auto show = [&](const char* title, const std::vector<MetricReport>& rows) {
            std::cout << "# " << title << '\n' << emit_report(rows, fmt) << '\n';
        };
        if (table == "all" || table == "tasks") show("single-task vs multitask", single_vs_multitask(setup, data));
        if (table == "all" || table == "dropout") show("dropout kinds", dropout_comparison(setup, data));
        if (table == "all" || table == "transfer") show("transfer vs no transfer", transfer_comparison(setup, data));
        if (table == "all" || table == "two-tier") show("two-tier pipeline", two_tier_report(setup, data));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
