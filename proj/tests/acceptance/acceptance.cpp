// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unistd.h>

#include "../support/grad_suite.hpp"
#include "../support/oracles.hpp"
#include "simcse/adamw.hpp"
#include "simcse/cli.hpp"
#include "simcse/experiments.hpp"
#include "simcse/format.hpp"
#include "simcse/metrics.hpp"
#include "simcse/report.hpp"
#include "simcse/trainer.hpp"

namespace {

using namespace simcse;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

// ---------------------------------------------------------------------------
Outcome gradient_oracles() {
    const auto t0 = Clock::now();
    Rng rng(20240601);
    gradsuite::Errors ops_err;
    std::string worst_name;
    for (int trial = 0; trial < 100; ++trial) {
        for (const auto& r : gradsuite::run_op_trial(rng)) {
            if (r.errors.worst() > ops_err.worst()) worst_name = r.name;
            ops_err.relative = std::max(ops_err.relative, r.errors.relative);
            ops_err.scaled = std::max(ops_err.scaled, r.errors.scaled);
        }
    }
    double straight_through = 0.0;
    for (int trial = 0; trial < 100; ++trial)
        straight_through = std::max(straight_through, gradsuite::straight_through_deviation(rng));
    gradsuite::Errors e2e;
    std::size_t coords = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto r = gradsuite::run_encoder_trial(1000 + static_cast<std::uint64_t>(trial));
        e2e.relative = std::max(e2e.relative, r.errors.relative);
        e2e.scaled = std::max(e2e.scaled, r.errors.scaled);
        coords += r.coordinates;
    }
    const double secs = seconds_since(t0);
    return {ops_err.worst() < 1e-4 && straight_through == 0.0 && e2e.worst() < 1e-3 && secs < 60.0,
            "ops max err " + sci(ops_err.worst()) + " (" + worst_name + ") < 1e-4; straight-through passes grad exactly: " +
                (straight_through == 0.0 ? "yes" : "no") + "; encoder max err " + sci(e2e.worst()) + " over " +
                std::to_string(coords) + " coords < 1e-3; " + format_fixed(secs, 1) + " s < 60 s"};
}

// ---------------------------------------------------------------------------
Outcome contrastive_oracles() {
    Rng rng(77);
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t n = 2; n <= 8; ++n) {
        for (std::size_t d : {2, 4, 16}) {
            for (int trial = 0; trial < 50; ++trial) {
                const double tau = 0.05 + rng.uniform();
                const auto h = oracle::random_matrix(n, d, rng);
                const auto hp = oracle::random_matrix(n, d, rng);
                const auto hm = oracle::random_matrix(n, d, rng);
                const double u = unsup_simcse_loss(oracle::to_tensor(h), oracle::to_tensor(hp), tau).item();
                const double s =
                    sup_simcse_loss(oracle::to_tensor(h), oracle::to_tensor(hp), oracle::to_tensor(hm), tau).item();
                worst = std::max(worst, std::fabs(u - oracle::unsup_simcse(h, hp, tau)));
                worst = std::max(worst, std::fabs(s - oracle::sup_simcse(h, hp, hm, tau)));
                cases += 2;
            }
        }
    }
    return {worst <= 1e-10, "max |loss - brute force| " + sci(worst) + " <= 1e-10 over " + std::to_string(cases) + " cases"};
}

// ---------------------------------------------------------------------------
Model small_model(const Vocab& vocab, DropoutPolicy dropout, std::uint64_t seed, Pooling pooling = Pooling::cls_tanh) {
    EncoderConfig enc;
    enc.hidden_dim = 32;
    enc.num_layers = 2;
    enc.num_heads = 4;
    enc.ffn_dim = 64;
    enc.max_seq_len = 32;
    enc.dropout = dropout;
    enc.pooling = pooling;
    return init_model(vocab, enc, {}, seed);
}

Outcome degenerate_augmentation() {
    const std::vector<std::string> base = {"the cat sat on the mat", "a dog runs in the park"};
    const Vocab vocab = Vocab::build(base);
    double worst = 0.0;
    std::size_t batches = 0;
    // Direct two-pass check for every N.
    for (std::size_t n = 2; n <= 8; ++n) {
        const Model m = small_model(vocab, DropoutPolicy::standard(0.0), 5);
        const std::vector<std::string> copies(n, base[n % 2]);
        const auto tokens = make_sentence_batches(copies, n, vocab, 32, nullptr, false).front();
        Rng rng(9);
        const ForwardContext ctx{Mode::train, 0, &rng};
        const Tensor h = encode(tokens, m.params, m.encoder, ctx).pooled;
        const Tensor hp = encode(tokens, m.params, m.encoder, ctx).pooled;
        worst = std::max(worst, std::fabs(unsup_simcse_loss(h, hp, 0.05).item() - std::log(static_cast<double>(n))));
        ++batches;
    }
    // Every step of a training run over duplicated sentences.
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 6;
    cfg.optim.lr = 1e-3;
    cfg.dropout = DropoutPolicy::standard(0.0);
    const std::vector<std::string> corpus(24, base[0]);
    TrainHooks hooks;
    bool finite = true;
    hooks.on_step = [&](const StepEvent& e) {
        finite = finite && std::isfinite(e.loss);
        worst = std::max(worst, std::fabs(e.loss - std::log(6.0)));
        ++batches;
    };
    train_unsup_simcse(cfg, corpus, small_model(vocab, DropoutPolicy::standard(0.0), 5), {}, hooks);
    return {worst <= 1e-9 && finite,
            "max |loss - ln N| " + sci(worst) + " <= 1e-9 over " + std::to_string(batches) + " batches, N in 2..8"};
}

// ---------------------------------------------------------------------------
Outcome alignment_improvement() {
    const auto t0 = Clock::now();
    Rng gen = Rng::for_stream(4, "synth/paraphrase");
    std::vector<std::string> pool;
    while (pool.size() < 500) {
        const auto examples = synth_toy_corpus(Schema::pair_labeled, 400, gen);
        std::vector<Example> merged;
        for (const auto& s : pool) merged.push_back(Classification{s, 0});
        for (const auto& e : examples) {
            merged.push_back(Classification{std::get<PairLabeled>(e).text_a, 0});
            merged.push_back(Classification{std::get<PairLabeled>(e).text_b, 0});
        }
        pool = sentence_pool(merged);
    }
    pool.resize(500);
    const std::vector<std::string> train(pool.begin(), pool.begin() + 400);
    const std::vector<std::string> held_out(pool.begin() + 400, pool.end());
    const Vocab vocab = Vocab::build(pool);

    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.optim.lr = 3e-5;
    cfg.tau = 0.05;
    cfg.dropout = DropoutPolicy::standard(0.1);
    cfg.seed = 11;
    const Model init = small_model(vocab, cfg.dropout, 11);
    auto measure = [&](const Model& m) {
        Rng rng(123);  // same masks before and after training
        return dropout_alignment(m, held_out, rng);
    };
    const double before = measure(init);
    const Checkpoint ck = train_unsup_simcse(cfg, train, init);
    const double after = measure(ck.model);
    const double secs = seconds_since(t0);
    return {after > before && secs < 180.0, "held-out alignment " + format_fixed(before, 6) + " -> " +
                                                format_fixed(after, 6) + " (strict increase); " +
                                                format_fixed(secs, 1) + " s < 180 s"};
}

// ---------------------------------------------------------------------------
Outcome toy_learnability() {
    auto t0 = Clock::now();
    Rng sst_rng(3);
    const auto sst = synth_toy_corpus(Schema::classification, 100, sst_rng);
    EncoderConfig enc;
    enc.hidden_dim = 32;
    enc.num_layers = 2;
    enc.num_heads = 4;
    enc.ffn_dim = 64;
    enc.max_seq_len = 32;
    TrainConfig cfg;
    cfg.task = Task::sst;
    cfg.epochs = 30;
    cfg.optim.lr = 1e-3;
    cfg.dropout = DropoutPolicy::standard(0.1);
    enc.dropout = cfg.dropout;
    const Model sst_model = init_model(Vocab::build(sentence_pool(sst)), enc, {}, 42);
    const auto sst_ck = train_single_task(cfg, sst, sst, sst_model);
    const double acc = evaluate(sst_ck.model, Task::sst, sst).value;
    const double sst_secs = seconds_since(t0);

    t0 = Clock::now();
    Rng sts_rng(8);
    const auto sts = synth_toy_corpus(Schema::pair_scored, 200, sts_rng);
    enc.pooling = Pooling::mean;
    HeadConfig heads;
    heads.sts_head = SimilarityHeadKind::cos_scale;
    cfg.task = Task::sts;
    cfg.sts_head = heads.sts_head;
    cfg.optim.lr = 3e-3;
    const Model sts_model = init_model(Vocab::build(sentence_pool(sts)), enc, heads, 42);
    const auto sts_ck = train_single_task(cfg, sts, sts, sts_model);
    const double r = evaluate(sts_ck.model, Task::sts, sts).value;
    const double sts_secs = seconds_since(t0);
    return {acc >= 0.95 && r >= 0.95 && sst_secs < 180.0 && sts_secs < 180.0,
            "sst train acc " + format_fixed(acc, 4) + " >= 0.95 (" + format_fixed(sst_secs, 1) +
                " s); sts train pearson " + format_fixed(r, 4) + " >= 0.95 (" + format_fixed(sts_secs, 1) +
                " s); 30 epochs"};
}

// ---------------------------------------------------------------------------
Outcome dropout_suite() {
    Rng rng(31);
    bool monotone = true;
    for (int k = 0; k < 20; ++k) {
        const double gamma = 0.5 + 10.0 * rng.uniform();
        const double p = 0.05 + 0.6 * rng.uniform();
        const auto policy = DropoutPolicy::curriculum_policy(p, gamma, 10000);
        double prev = curriculum_rate(0, policy);
        monotone = monotone && prev == 0.0;
        for (std::int64_t step = 1; step <= 10000; ++step) {
            const double cur = curriculum_rate(step, policy);
            monotone = monotone && cur >= prev && cur <= p;
            prev = cur;
        }
    }
    const Tensor ones = Tensor::full({1000, 1000}, 1.0);
    Rng mask_rng(32);
    const Tensor dropped = standard_dropout(ones, 0.3, Mode::train, mask_rng);
    std::size_t zeros = 0;
    for (double v : dropped.data()) zeros += v == 0.0 ? 1 : 0;
    const double rate = static_cast<double>(zeros) / 1e6;

    const Tensor x = oracle::random_tensor({64, 16}, rng, false, -3.0, 3.0);
    MaskRecord record;
    adaptive_dropout(x, x, Tensor::scalar(1.0), Tensor::scalar(0.0), Mode::train, rng, &record);
    double lo = 1.0, hi = 0.0;
    for (double pi : record.keep_prob) {
        lo = std::min(lo, pi);
        hi = std::max(hi, pi);
    }
    const bool adaptive_ok = lo > 0.0 && hi < 1.0 && hi > lo;
    return {monotone && std::fabs(rate - 0.3) <= 0.003 && adaptive_ok,
            std::string("curriculum monotone for 20 schedules: ") + (monotone ? "yes" : "no") + "; standard rate " +
                format_fixed(rate, 5) + " (0.3 +- 0.003); adaptive pi in [" + format_fixed(lo, 4) + ", " +
                format_fixed(hi, 4) + "] within (0,1), non-constant"};
}

// ---------------------------------------------------------------------------
Outcome optimizer() {
    // Convergence on ||theta||^2.
    Tensor theta = Tensor::from({2}, {5.0, -5.0}, true);
    AdamWOptions opts;
    opts.lr = 0.1;
    AdamW adam({{"theta", theta, true}}, opts);
    for (int i = 0; i < 200; ++i) {
        adam.zero_grad();
        backward(ops::sum(ops::square(theta)));
        adam.step();
    }
    const double norm = std::hypot(theta[0], theta[1]);

    // Single steps against the scalar oracle, with weight decay.
    Rng rng(41);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        AdamWOptions o;
        o.lr = 1e-3 + rng.uniform() * 0.1;
        o.weight_decay = rng.uniform() * 0.1;
        std::vector<double> th = oracle::uniform_vector(5, rng, -2, 2);
        std::vector<double> m(5, 0.0), v(5, 0.0);
        std::vector<oracle::AdamScalar> ref;
        for (double t : th) ref.push_back({t});
        for (std::int64_t t = 1; t <= 3; ++t) {
            const auto g = oracle::uniform_vector(5, rng, -3, 3);
            adamw_update(th, g, m, v, t, o, true);
            for (std::size_t i = 0; i < 5; ++i) {
                ref[i].step(g[i], o.lr, o.beta1, o.beta2, o.eps, o.weight_decay);
                worst = std::max(worst, std::fabs(th[i] - ref[i].theta));
            }
        }
    }

    // Zero gradient: only the decoupled decay acts.
    AdamWOptions d;
    d.lr = 0.01;
    d.weight_decay = 0.1;
    Tensor w = Tensor::from({3}, {1.5, -2.0, 0.25}, true);
    const std::vector<double> w0(w.data().begin(), w.data().end());
    AdamW decay_only({{"w", w, true}}, d);
    w.mutable_grad();  // present but zero
    decay_only.step();
    double decay_err = 0.0;
    for (std::size_t i = 0; i < 3; ++i) decay_err = std::max(decay_err, std::fabs((w0[i] - w[i]) - d.lr * d.weight_decay * w0[i]));
    return {norm < 1e-2 && worst <= 1e-12 && decay_err <= 1e-15,
            "||theta|| after 200 steps " + sci(norm) + " < 1e-2; oracle max diff " + sci(worst) +
                " <= 1e-12; decay shrink error " + sci(decay_err)};
}

// ---------------------------------------------------------------------------
Outcome metrics_suite() {
    Rng rng(51);
    double worst = 0.0, affine = 0.0, perm = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto x = oracle::uniform_vector(100, rng);
        const auto y = oracle::uniform_vector(100, rng);
        const double r = pearson(x, y);
        worst = std::max(worst, std::fabs(r - oracle::pearson(x, y)));
        const double a = 0.1 + 5.0 * rng.uniform(), b = rng.normal(0.0, 3.0);
        std::vector<double> ax(x), by(y);
        for (auto& v : ax) v = a * v + b;
        for (auto& v : by) v = 2.0 * a * v - b;
        affine = std::max(affine, std::fabs(pearson(ax, y) - r));
        affine = std::max(affine, std::fabs(pearson(x, by) - r));
        const auto order = shuffled_indices(100, rng);
        std::vector<double> px, py;
        for (auto i : order) {
            px.push_back(x[i]);
            py.push_back(y[i]);
        }
        perm = std::max(perm, std::fabs(pearson(px, py) - r));
    }
    bool marginals = true;
    for (int trial = 0; trial < 50; ++trial) {
        const auto t = oracle::uniform_vector(200, rng, 0.0, 5.0);
        const auto p = oracle::uniform_vector(200, rng, 0.0, 5.0);
        const auto bins = 2 + rng.below(8);
        const Heatmap h = similarity_heatmap(t, p, bins);
        marginals = marginals && h.true_marginal() == histogram(t, bins) && h.pred_marginal() == histogram(p, bins) &&
                    h.total() == t.size();
    }
    return {worst <= 1e-12 && affine <= 1e-12 && perm <= 1e-12 && marginals,
            "pearson vs reference " + sci(worst) + " <= 1e-12 (1000 vectors); affine " + sci(affine) +
                "; paired permutation " + sci(perm) + "; heatmap marginals == histograms: " +
                (marginals ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome reproducibility() {
    const fs::path root = fs::temp_directory_path() / ("simcse_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    std::ostringstream sink;
    auto cli = [&](std::vector<std::string> args) { return cli::run_cli(args, sink, sink); };
    const std::string dir = root.string();
    cli({"synth", "--kind", "sts", "--size", "48", "--seed", "1", "--out", dir + "/sts_train.tsv"});
    cli({"synth", "--kind", "sts", "--size", "16", "--seed", "2", "--out", dir + "/sts_dev.tsv"});
    cli({"synth", "--kind", "nli", "--size", "32", "--seed", "3", "--out", dir + "/nli.tsv"});
    std::ofstream(root / "toy.json") << R"({"encoder": {"hidden_dim": 16, "num_layers": 2, "num_heads": 2,
      "ffn_dim": 32, "max_seq_len": 24}, "optim": {"lr": 0.001}, "train": {"epochs": 2},
      "unsup_simcse": {"epochs": 2, "batch_size": 16}, "sup_simcse": {"epochs": 2, "batch_size": 8},
      "data": {"sts_train": ")" << dir << R"(/sts_train.tsv", "sts_dev": ")" << dir << R"(/sts_dev.tsv",
      "nli_train": ")" << dir << R"(/nli.tsv"}})";
    int codes = 0;
    for (const char* out : {"run_a", "run_b"}) {
        codes += cli({"train", "two-tier", "--config", dir + "/toy.json", "--output_dir", dir + "/" + out});
    }
    auto only_run = [&](const char* out) { return fs::directory_iterator(root / out)->path(); };
    const fs::path a = only_run("run_a"), b = only_run("run_b");
    const bool same_ckpt = read_file(a / "checkpoint.scf") == read_file(b / "checkpoint.scf");
    const bool same_metrics = read_file(a / "metrics.tsv") == read_file(b / "metrics.tsv");
    const auto metric_rows = parse_report_tsv(read_file(a / "metrics.tsv")).size();

    // Round trip: encode outputs identical to the last bit.
    const Checkpoint loaded = load_checkpoint(a / "checkpoint.scf");
    const Checkpoint reloaded = deserialize_checkpoint(serialize_checkpoint(loaded));
    const auto lines = sentence_pool(load_tsv(root / "sts_dev.tsv", Schema::pair_scored));
    const auto tokens = make_sentence_batches(lines, lines.size(), loaded.model.vocab, 24, nullptr, false).front();
    const ForwardContext ctx{Mode::eval, 0, nullptr};
    const Tensor e1 = encode(tokens, loaded.model.params, loaded.model.encoder, ctx).sequence;
    const Tensor e2 = encode(tokens, reloaded.model.params, reloaded.model.encoder, ctx).sequence;
    const bool zero_ulp = std::memcmp(e1.data().data(), e2.data().data(), e1.data().size_bytes()) == 0;
    fs::remove_all(root);
    return {codes == 0 && same_ckpt && same_metrics && metric_rows == 3 && zero_ulp,
            std::string("two runs: checkpoint bytes identical ") + (same_ckpt ? "yes" : "no") + ", metrics identical " +
                (same_metrics ? "yes" : "no") + ", " + std::to_string(metric_rows) + " stage metrics; round-trip encode 0 ulp " +
                (zero_ulp ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
bool table_shape(const std::vector<MetricReport>& rows, const std::vector<std::string>& models, std::string& why) {
    const std::map<std::string, std::string> metric_of = {
        {"paraphrase", "accuracy"}, {"sst", "accuracy"}, {"sts", "pearson"}};
    std::set<std::string> seen;
    for (const auto& r : rows) {
        seen.insert(r.model);
        if (!metric_of.contains(r.task) || metric_of.at(r.task) != r.metric) {
            why = "bad task/metric " + r.task + "/" + r.metric;
            return false;
        }
        try {
            r.validate();
        } catch (const std::exception& e) {
            why = e.what();
            return false;
        }
    }
    for (const auto& m : models) {
        std::set<std::string> tasks;
        for (const auto& r : rows)
            if (r.model == m) tasks.insert(r.task);
        if (tasks != std::set<std::string>{"paraphrase", "sst", "sts"}) {
            why = "model " + m + " lacks a task";
            return false;
        }
    }
    if (seen != std::set<std::string>(models.begin(), models.end())) {
        why = "unexpected model set";
        return false;
    }
    const std::string tsv = emit_report(rows, ReportFormat::tsv);
    const auto parsed = parse_report_tsv(tsv);
    std::size_t overall = 0;
    for (const auto& r : parsed) overall += r.task == "overall" ? 1 : 0;
    if (overall != models.size() || parsed.size() != rows.size() + models.size()) {
        why = "overall rows missing";
        return false;
    }
    return true;
}

Outcome experiment_shapes() {
    const auto t0 = Clock::now();
    ExperimentSetup setup;
    setup.encoder.hidden_dim = 16;
    setup.encoder.num_layers = 1;
    setup.encoder.num_heads = 2;
    setup.encoder.ffn_dim = 32;
    setup.encoder.max_seq_len = 24;
    setup.encoder.pooling = Pooling::mean;
    setup.base.epochs = 2;
    setup.base.optim.lr = 1e-3;
    setup.two_tier = TwoTierConfig::from_base(setup.base);
    setup.two_tier.unsup.batch_size = 16;
    setup.two_tier.sup.batch_size = 8;
    setup.two_tier.sup.epochs = 2;
    const ToyCorpora data = make_toy_corpora({}, 42);

    std::string why;
    std::vector<std::string> results;
    bool ok = true;
    auto check = [&](const char* label, const std::vector<MetricReport>& rows, const std::vector<std::string>& models) {
        const bool good = table_shape(rows, models, why);
        results.push_back(std::string(label) + (good ? " ok" : " FAILED (" + why + ")"));
        ok = ok && good;
    };
    check("tasks", single_vs_multitask(setup, data), {"single-task", "multitask"});
    check("dropout", dropout_comparison(setup, data), {"standard-dropout", "adaptive-dropout", "curriculum-dropout"});
    check("transfer", transfer_comparison(setup, data), {"no-transfer", "unsup-simcse+transfer", "sup-simcse+transfer"});
    check("two-tier", two_tier_report(setup, data), {"two-tier+transfer"});
    std::string detail;
    for (const auto& r : results) detail += (detail.empty() ? "" : ", ") + r;
    return {ok, detail + "; " + format_fixed(seconds_since(t0), 1) + " s"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
        {"gradient oracle suite", gradient_oracles},
        {"contrastive-loss oracles", contrastive_oracles},
        {"degenerate augmentation identity", degenerate_augmentation},
        {"alignment improvement", alignment_improvement},
        {"toy task learnability", toy_learnability},
        {"dropout suite", dropout_suite},
        {"optimizer", optimizer},
        {"metrics", metrics_suite},
        {"pipeline reproducibility", reproducibility},
        {"experiment-shape reproduction", experiment_shapes},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
              << " acceptance criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
