// Acceptance suite: one pass/fail line per criterion.
//
//   1. gradient fidelity          (finite differences, 64-bit)
//   2. retrieval oracle equality  (brute-force argmax, 100 corpora)
//   3. structural invariants      (softmax rows, GAT locality, masks,
//                                  monotonicity, equivariance, tau)
//   4. synthetic end-to-end       (full model vs majority and ablations)
//   5. hop-sweep shape            (dev accuracy peaks at the planted k)
//   6. chain recovery             (recall@H on the k=2 dev set)
//   7. determinism & persistence  (bit-identical runs and round trips)
//
// Runs everything by default; pass criterion numbers as arguments to run a
// subset (e.g. "acceptance 1 2 3 7"). Exit code 0 iff every selected
// criterion passes. Criteria 4-6 train models and dominate the runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "srmfv/checkpoint.hpp"
#include "srmfv/grad_check.hpp"
#include "srmfv/metrics.hpp"
#include "srmfv/pipeline.hpp"
#include "srmfv/synthbench.hpp"
#include "srmfv/trainer.hpp"

namespace {

using namespace srmfv;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

Corpus make_corpus(const GeneratedData& data) { return ingest_corpus(data.corpus); }

/// Dev-set label accuracy of a freshly trained model.
struct RunResult {
  double la = 0.0;
  double recall_at_h = 0.0;
  double seconds = 0.0;
};

RunResult train_and_eval(const Corpus& corpus,
                         const std::vector<Claim>& train_claims,
                         const std::vector<Claim>& dev_claims,
                         const TrainConfig& cfg) {
  const double t0 = now_seconds();
  std::ostringstream sink;
  TrainResult tr = train<double>(corpus, train_claims, cfg, sink);
  Model<double> model = model_from_checkpoint<double>(tr.checkpoint);
  std::vector<Prediction> preds = predict_all(dev_claims, corpus, model);
  MetricsRecord m = evaluate(preds, dev_claims);
  RunResult r;
  r.la = m.la;
  r.recall_at_h = m.per_hop.empty() ? 0.0 : m.per_hop.back();
  r.seconds = now_seconds() - t0;
  return r;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: gradient fidelity
// ---------------------------------------------------------------------------

/// Scalarize a tensor-valued builder for finite differencing.
template <typename F>
double op_check(std::vector<Tensor<double>> params, F&& build) {
  return grad_check<double>([&]() { return sum_all(build()); },
                            std::move(params));
}

Tensor<double> randt(Rng& rng, int r, int c, double offset = 0.0) {
  Mat<double> m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform() - 0.5 + offset;
  return Tensor<double>::leaf(std::move(m), true);
}

Outcome criterion1() {
  Outcome out;
  const double t0 = now_seconds();
  const double tol = 1e-4;
  double worst = 0.0;
  auto track = [&](const std::string& name, double err) {
    worst = std::max(worst, err);
    if (err > tol && out.detail.empty()) out.detail = "worst op: " + name;
  };
  Rng rng(7);

  // Elementwise and structural operations on <=6-row instances.
  {
    auto a = randt(rng, 4, 5), b = randt(rng, 4, 5);
    track("add", op_check({a, b}, [&] { return add(a, b); }));
    track("sub", op_check({a, b}, [&] { return sub(a, b); }));
    track("mul", op_check({a, b}, [&] { return mul(a, b); }));
    track("scale", op_check({a}, [&] { return scale(a, 1.7); }));
    track("add_const", op_check({a}, [&] { return add_const(a, 0.3); }));
    track("transpose", op_check({a}, [&] { return transpose(a); }));
    track("relu", op_check({a}, [&] { return relu(a); }));
    track("leaky_relu", op_check({a}, [&] { return leaky_relu(a); }));
    track("tanh", op_check({a}, [&] { return tanh_op(a); }));
    track("sigmoid", op_check({a}, [&] { return sigmoid(a); }));
    track("mean_rows", op_check({a}, [&] { return mean_rows(a); }));
    track("slice_rows", op_check({a}, [&] { return slice_rows(a, 1, 2); }));
    track("slice_cols", op_check({a}, [&] { return slice_cols(a, 1, 3); }));
    track("concat_rows",
          op_check({a, b}, [&] { return concat_rows(std::vector<Tensor<double>>{a, b}); }));
    track("concat_cols",
          op_check({a, b}, [&] { return concat_cols(std::vector<Tensor<double>>{a, b}); }));
    track("pick", op_check({a}, [&] { return pick(a, 2, 3); }));
    track("softmax_rows",
          op_check({a}, [&] { return softmax_rows(a); }));
    BoolMat mask = BoolMat::Constant(4, 5, true);
    mask(0, 1) = mask(2, 3) = mask(2, 4) = false;
    track("softmax_rows_masked",
          op_check({a}, [&] { return softmax_rows(a, &mask); }));
  }
  {
    auto a = randt(rng, 3, 4), b = randt(rng, 4, 6);
    track("matmul", op_check({a, b}, [&] { return matmul(a, b); }));
  }
  {
    auto a = randt(rng, 4, 5, 2.0), b = randt(rng, 4, 5, 2.0);  // positive
    track("div", op_check({a, b}, [&] { return div(a, b); }));
    track("log", op_check({a}, [&] { return log_op(a); }));
    track("sqrt", op_check({a}, [&] { return sqrt_op(a); }));
    auto s = Tensor<double>::scalar(0.7, true);
    track("mul_scalar", op_check({a, s}, [&] { return mul_scalar(a, s); }));
  }
  {
    auto a = randt(rng, 5, 6);
    auto g = randt(rng, 1, 6, 1.0), bb = randt(rng, 1, 6);
    track("layernorm_rows",
          op_check({a, g, bb}, [&] { return layernorm_rows(a, g, bb); }));
    auto row = randt(rng, 1, 6);
    track("add_rowwise",
          op_check({a, row}, [&] { return add_rowwise(a, row); }));
    std::vector<int> idx{0, 2, 2, 4, 1};
    track("gather_rows",
          op_check({a}, [&] { return gather_rows(a, idx); }));
  }
  {
    auto q = randt(rng, 1, 6), e = randt(rng, 1, 6);
    track("cosine_sim",
          op_check({q, e}, [&] { return cosine_sim(q, e); }));
  }

  // End-to-end losses on a tiny generated benchmark (d=8).
  ChainSpec spec;
  spec.hops = 2;
  spec.entity_vocab = 12;
  spec.relation_vocab = 4;
  spec.num_claims = 9;
  spec.dev_fraction = 0.34;
  spec.distractor_ratio = 0.5;
  spec.seed = 11;
  GeneratedData data = generate(spec);
  Corpus corpus = make_corpus(data);

  TrainConfig cfg;
  cfg.d = 8;
  cfg.heads = 2;
  cfg.L_retriever = 1;
  cfg.L_verifier = 1;
  cfg.hops = 2;
  cfg.neg_samples = 4;
  Rng mrng(3);
  Model<double> model =
      Model<double>::init(cfg, static_cast<int>(corpus.vocab_tokens.size()),
                          mrng);

  const Claim* gold_claim = nullptr;
  for (const auto& c : data.train_claims)
    if (!c.gold_chain.empty()) { gold_claim = &c; break; }
  std::map<std::pair<std::string, int>, int> sent_index;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
    sent_index[{corpus.sentences[i].doc_id, corpus.sentences[i].sent_id}] =
        static_cast<int>(i);
  Sentence claim =
      corpus.make_sentence("claim:" + gold_claim->claim_id, 0,
                           gold_claim->text);
  std::vector<int> gold_idx = detail::resolve_chain(*gold_claim, sent_index);
  std::vector<Sentence> chain;
  for (int idx : gold_idx)
    chain.push_back(corpus.sentences[static_cast<std::size_t>(idx)]);

  {
    std::vector<Tensor<double>> params = model.retriever_param_list();
    params.push_back(model.embed);
    Rng neg_rng(5);
    const auto neg_state = neg_rng.state();
    track("retrieval_loss",
          grad_check<double>(
              [&]() {
                neg_rng.set_state(neg_state);
                return claim_retrieval_loss(claim, chain, gold_idx, corpus,
                                            model, neg_rng);
              },
              params));
  }
  {
    std::vector<Tensor<double>> params = model.verifier_param_list();
    params.push_back(model.embed);
    params.push_back(model.sem_W);
    track("verification_loss",
          grad_check<double>(
              [&]() {
                return claim_verification_loss(claim, chain,
                                               gold_claim->label, corpus,
                                               model);
              },
              params));
  }

  out.seconds = now_seconds() - t0;
  out.pass = worst <= tol && out.seconds < 300.0;
  char err[32];
  std::snprintf(err, sizeof(err), "%.2e", worst);
  out.detail = std::string("max rel err ") + err +
               (out.detail.empty() ? "" : ", " + out.detail);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 2: retrieval oracle equivalence
// ---------------------------------------------------------------------------

Outcome criterion2() {
  Outcome out;
  const double t0 = now_seconds();
  const char* words[] = {"alpha", "bravo", "carol", "delta", "echo", "fox",
                         "golf", "hotel", "india", "julia", "kilo", "lima",
                         "mike", "nancy", "oscar", "papa", "quebec", "romeo"};
  const int nwords = static_cast<int>(sizeof(words) / sizeof(words[0]));
  int agree = 0;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(1000 + static_cast<std::uint64_t>(trial));
    const int n = 5 + static_cast<int>(rng.below(196));  // 5..200 sentences
    std::vector<CorpusRecord> records;
    std::vector<std::string> texts;
    for (int i = 0; i < n; ++i) {
      std::string text;
      // One corpus in four plants exact duplicates to force score ties.
      if (trial % 4 == 0 && i > 0 && rng.below(4) == 0) {
        text = texts[rng.below(static_cast<std::uint64_t>(texts.size()))];
      } else {
        const int len = 3 + static_cast<int>(rng.below(6));
        for (int t = 0; t < len; ++t) {
          if (t) text += ' ';
          text += words[rng.below(static_cast<std::uint64_t>(nwords))];
        }
      }
      texts.push_back(text);
      records.push_back({"doc" + std::to_string(i), 0, text});
    }
    Corpus corpus = ingest_corpus(records);

    TrainConfig cfg;
    cfg.d = 16;
    cfg.heads = 2;
    cfg.L_retriever = 1;
    cfg.L_verifier = 1;
    cfg.seed = static_cast<std::uint64_t>(trial);
    Rng mrng(cfg.seed + 77);
    Model<double> model = Model<double>::init(
        cfg, static_cast<int>(corpus.vocab_tokens.size()), mrng);

    std::string ctext = std::string(words[rng.below(nwords)]) + " " +
                        words[rng.below(nwords)] + " " + words[rng.below(nwords)];
    Sentence claim = corpus.make_sentence("claim", 0, ctext);
    NoGradGuard ng;
    Tensor<double> q = build_query(claim, {}, model, corpus);
    Eigen::Matrix<double, 1, Eigen::Dynamic> qrow = q.value().row(0);
    CandidateIndex<double> index = CandidateIndex<double>::build(corpus, model);

    std::vector<bool> excluded(corpus.sentences.size(), false);
    for (std::size_t i = 0; i < excluded.size(); ++i)
      if (rng.below(10) == 0) excluded[i] = true;
    excluded[rng.below(static_cast<std::uint64_t>(excluded.size()))] = false;

    // Brute-force full scan: ascending index, strictly-greater replacement
    // (equal scores keep the lowest index).
    int expect = -1;
    double best_score = 0.0;
    for (Eigen::Index i = 0; i < index.embeddings.rows(); ++i) {
      if (excluded[static_cast<std::size_t>(i)]) continue;
      const double denom =
          qrow.norm() * index.norms[static_cast<std::size_t>(i)] + 1e-12;
      const double s = qrow.dot(index.embeddings.row(i)) / denom;
      if (expect < 0 || s > best_score) {
        expect = static_cast<int>(i);
        best_score = s;
      }
    }
    auto [got, scores] = retrieve_next(qrow, index, excluded);
    (void)scores;
    if (got == expect) ++agree;
  }
  out.pass = agree == trials;
  out.seconds = now_seconds() - t0;
  out.detail = std::to_string(agree) + "/" + std::to_string(trials) +
               " corpora agree";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 3: structural invariants
// ---------------------------------------------------------------------------

Outcome criterion3() {
  Outcome out;
  const double t0 = now_seconds();
  std::vector<std::string> failures;
  Rng rng(42);

  // (a) masked softmax rows sum to 1 within 1e-6.
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 2 + static_cast<int>(rng.below(7));
    Tensor<double> x = randt(rng, n, n);
    BoolMat mask = BoolMat::Constant(n, n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      mask(i, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)))) = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (rng.below(2)) mask(i, j) = true;
    }
    NoGradGuard ng;
    Mat<double> sm = softmax_rows(x, &mask).value();
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::abs(sm.row(i).sum() - 1.0) > 1e-6)
        failures.push_back("softmax row sum");
  }

  // (b) GAT attention is zero outside neighborhoods: perturbing a
  // non-neighbor leaves a node's output bit-identical.
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 4 + static_cast<int>(rng.below(3));
    const int d = 8;
    BoolMat mask = BoolMat::Constant(n, n, false);
    for (Eigen::Index i = 0; i < n; ++i) {
      mask(i, i) = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && rng.below(3) == 0) { mask(i, j) = true; mask(j, i) = true; }
    }
    GatLayerParams<double> p;
    Rng prng(rep + 9);
    p.W = init_param<double>(prng, d, d, d);
    p.a1 = init_param<double>(prng, d, 1, d);
    p.a2 = init_param<double>(prng, d, 1, d);
    Tensor<double> h = randt(rng, n, d);
    NoGradGuard ng;
    Mat<double> base = gat_layer(h, mask, p).value();
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    Mat<double> hv = h.value();
    hv.row(j).array() += 3.5;
    Mat<double> pert =
        gat_layer(Tensor<double>::leaf(std::move(hv)), mask, p).value();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (mask(i, j)) continue;
      if ((base.row(i).array() != pert.row(i).array()).any())
        failures.push_back("gat locality");
    }
  }

  // (c) asymmetric mask holds at every verifier layer: token rows are
  // bit-insensitive to the injected summary.
  {
    TrainConfig cfg;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.L_verifier = 3;
    Rng mrng(5);
    Model<double> model = Model<double>::init(cfg, 40, mrng);
    NoGradGuard ng;
    for (const auto& layer : model.ver.layers) {
      Tensor<double> h = randt(rng, 5, 8);
      Tensor<double> z1 = randt(rng, 1, 8);
      Tensor<double> z2 = randt(rng, 1, 8);
      Mat<double> o1 = reinject_and_encode(h, z1, layer).value();
      Mat<double> o2 = reinject_and_encode(h, z2, layer).value();
      for (Eigen::Index i = 1; i < o1.rows(); ++i)
        if ((o1.row(i).array() != o2.row(i).array()).any())
          failures.push_back("asymmetric mask");
    }
  }

  // (d) subgraph monotonicity on random 4-hop sequences.
  {
    ChainSpec spec;
    spec.hops = 4;
    spec.entity_vocab = 30;
    spec.relation_vocab = 8;
    spec.num_claims = 12;
    spec.dev_fraction = 0.25;
    spec.distractor_ratio = 0.5;
    spec.seed = 21;
    GeneratedData data = generate(spec);
    Corpus corpus = make_corpus(data);
    TrainConfig cfg;
    cfg.d = 16;
    cfg.heads = 2;
    Rng mrng(8);
    Model<double> model = Model<double>::init(
        cfg, static_cast<int>(corpus.vocab_tokens.size()), mrng);
    int checked = 0;
    for (const auto& c : data.train_claims) {
      if (c.gold_chain.size() != 4) continue;
      std::map<std::pair<std::string, int>, int> sent_index;
      for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
        sent_index[{corpus.sentences[i].doc_id,
                    corpus.sentences[i].sent_id}] = static_cast<int>(i);
      Sentence claim = corpus.make_sentence("claim:" + c.claim_id, 0, c.text);
      std::vector<Sentence> chain;
      for (int idx : detail::resolve_chain(c, sent_index))
        chain.push_back(corpus.sentences[static_cast<std::size_t>(idx)]);
      SubgraphSequence seq = make_sequence(claim, chain, model, corpus);
      for (std::size_t k = 1; k < seq.graphs.size(); ++k) {
        const ReasoningGraph& a = seq.graphs[k - 1];
        const ReasoningGraph& b = seq.graphs[k];
        if (a.nodes.size() > b.nodes.size())
          failures.push_back("node monotonicity");
        for (std::size_t i = 0; i < a.nodes.size(); ++i)
          if (a.nodes[i].token_id != b.nodes[i].token_id ||
              a.nodes[i].source != b.nodes[i].source)
            failures.push_back("node prefix");
        auto subset = [&](const EdgeSet& small, const EdgeSet& big,
                          const char* what) {
          for (const auto& e : small)
            if (!big.count(e)) failures.push_back(what);
        };
        subset(a.adj, b.adj, "adjacency monotonicity");
        subset(a.cooc, b.cooc, "cooc monotonicity");
        subset(a.coref, b.coref, "coref monotonicity");
      }
      ++checked;
      if (checked >= 6) break;
    }
    if (checked == 0) failures.push_back("no 4-hop chains generated");
  }

  // (e) graph_aggregate permutation equivariance to 1e-6.
  for (int heads : {1, 2, 4}) {
    const int n = 5, d = 8;
    Tensor<double> Z = randt(rng, n, d);
    Mat<double> bias_v(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        bias_v(i, j) = rng.uniform() - 0.5;
    bias_v = ((bias_v + bias_v.transpose()) / 2.0).eval();
    EncoderLayerParams<double> p;
    Rng prng(heads + 30);
    p.mha_Wq = init_param<double>(prng, d, d, d);
    p.mha_Wk = init_param<double>(prng, d, d, d);
    p.mha_Wv = init_param<double>(prng, d, d, d);
    std::vector<int> perm{2, 0, 4, 1, 3};
    Mat<double> Zp(n, d);
    Mat<double> bias_p(n, n);
    for (int i = 0; i < n; ++i) {
      Zp.row(i) = Z.value().row(perm[static_cast<std::size_t>(i)]);
      for (int j = 0; j < n; ++j)
        bias_p(i, j) = bias_v(perm[static_cast<std::size_t>(i)],
                              perm[static_cast<std::size_t>(j)]);
    }
    NoGradGuard ng;
    Mat<double> base =
        graph_aggregate(Z, Tensor<double>::leaf(Mat<double>(bias_v)), p, heads)
            .value();
    Mat<double> permd = graph_aggregate(Tensor<double>::leaf(std::move(Zp)),
                                        Tensor<double>::leaf(std::move(bias_p)),
                                        p, heads)
                            .value();
    for (int i = 0; i < n; ++i)
      if ((permd.row(i) - base.row(perm[static_cast<std::size_t>(i)])).norm() >
          1e-6)
        failures.push_back("permutation equivariance");
  }

  // (f) tau-monotonicity of learned edges.
  {
    ChainSpec spec;
    spec.hops = 2;
    spec.entity_vocab = 15;
    spec.relation_vocab = 5;
    spec.num_claims = 6;
    spec.dev_fraction = 0.34;
    spec.distractor_ratio = 0.5;
    spec.seed = 31;
    GeneratedData data = generate(spec);
    Corpus corpus = make_corpus(data);
    Sentence claim = corpus.make_sentence("c", 0, data.train_claims[0].text);
    std::vector<Sentence> ev{corpus.sentences[0], corpus.sentences[1]};
    ReasoningGraph g = build_retrieval_graph(claim, ev, corpus.cooc_stop);
    const int d = 16;
    Rng erng(12);
    Mat<double> emb(static_cast<Eigen::Index>(g.nodes.size()), d);
    for (Eigen::Index i = 0; i < emb.rows(); ++i)
      for (int j = 0; j < d; ++j) emb(i, j) = 2.0 * (erng.uniform() - 0.5);
    Mat<double> w_sem(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) w_sem(i, j) = 2.0 * (erng.uniform() - 0.5);
    EdgeSet prev;
    bool first = true;
    for (double tau : {0.3, 0.5, 0.7, 0.9}) {
      EdgeSet cur = learned_edges<double>(g, emb, w_sem, tau);
      if (!first)
        for (const auto& e : cur)
          if (!prev.count(e)) failures.push_back("tau monotonicity");
      prev = std::move(cur);
      first = false;
    }
  }

  out.pass = failures.empty();
  out.seconds = now_seconds() - t0;
  if (failures.empty()) {
    out.detail = "all invariant groups hold";
  } else {
    std::set<std::string> uniq(failures.begin(), failures.end());
    out.detail = "violations:";
    for (const auto& f : uniq) out.detail += " " + f;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Criteria 4-6: synthetic end-to-end, hop sweep, chain recovery
// ---------------------------------------------------------------------------

// Training budget for the criterion-scale runs (2000 train / 500 dev).
struct Budget {
  int epochs = 100;
  int verifier_epochs = 60;
  double lr = 1e-3;
  int heads = 4;
};

TrainConfig full_config(int k, std::uint64_t seed, const Budget& b) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.d = 32;
  cfg.L_retriever = 2;
  cfg.L_verifier = 2;
  cfg.heads = b.heads;
  cfg.hops = k;
  cfg.lr = b.lr;
  cfg.epochs = b.epochs;
  cfg.verifier_epochs = b.verifier_epochs;
  return cfg;
}

GeneratedData criterion_data(int k) {
  ChainSpec spec;
  spec.hops = k;
  spec.entity_vocab = 200;
  spec.relation_vocab = 30;
  spec.num_claims = 2500;  // 2000 train / 500 dev at dev_fraction 0.2
  spec.dev_fraction = 0.2;
  spec.seed = 100 + static_cast<std::uint64_t>(k);
  return generate(spec);
}

Outcome criterion4(std::map<int, std::map<std::uint64_t, double>>& full_la,
                   std::map<int, Corpus>& corpora,
                   std::map<int, GeneratedData>& datasets) {
  Outcome out;
  const double t0 = now_seconds();
  const Budget budget;
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const char* ablation_names[] = {"concat_query", "single_hop",
                                  "unified_graph", "gat_encoder"};
  double max_run_seconds = 0.0;
  bool pass = true;
  std::ostringstream detail;

  for (int k : {2, 3, 4}) {
    datasets[k] = criterion_data(k);
    corpora[k] = make_corpus(datasets[k]);
    const GeneratedData& data = datasets[k];
    const Corpus& corpus = corpora[k];

    int beats_majority = 0;
    std::map<std::string, int> beats_ablation;
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = full_config(k, seed, budget);
      RunResult full = train_and_eval(corpus, data.train_claims,
                                      data.dev_claims, cfg);
      max_run_seconds = std::max(max_run_seconds, full.seconds);
      full_la[k][seed] = full.la;
      std::cerr << "  [c4] k=" << k << " seed=" << seed
                << " full LA=" << fmt(full.la) << " ("
                << fmt(full.seconds) << " s)\n";
      if (full.la >= 1.0 / 3.0 + 0.25) ++beats_majority;
      if (k >= 3) {
        for (int a = 0; a < 4; ++a) {
          TrainConfig acfg = cfg;
          if (a == 0) acfg.concat_query = true;
          if (a == 1) acfg.single_hop = true;
          if (a == 2) acfg.unified_graph = true;
          if (a == 3) acfg.gat_encoder = true;
          RunResult abl = train_and_eval(corpus, data.train_claims,
                                         data.dev_claims, acfg);
          max_run_seconds = std::max(max_run_seconds, abl.seconds);
          std::cerr << "  [c4] k=" << k << " seed=" << seed << " "
                    << ablation_names[a] << " LA=" << fmt(abl.la) << " ("
                    << fmt(abl.seconds) << " s)\n";
          if (full.la - abl.la >= 0.01) ++beats_ablation[ablation_names[a]];
        }
      }
    }
    const bool k_majority = beats_majority >= 2;
    bool k_ablations = true;
    if (k >= 3)
      for (const auto* name : ablation_names)
        if (beats_ablation[name] < 2) k_ablations = false;
    if (!(k_majority && k_ablations)) pass = false;
    detail << " k=" << k << ":+25pts " << beats_majority << "/3";
    if (k >= 3) {
      detail << " abl";
      for (const auto* name : ablation_names)
        detail << " " << name[0] << beats_ablation[name] << "/3";
    }
  }
  out.pass = pass && max_run_seconds <= 1800.0;
  out.seconds = now_seconds() - t0;
  out.detail = "max single run " + fmt(max_run_seconds) + " s;" + detail.str();
  return out;
}

Outcome criterion5() {
  Outcome out;
  const double t0 = now_seconds();
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  bool pass = true;
  std::ostringstream detail;

  for (int k : {2, 3, 4}) {
    // Noiseless, small-scale data: unique lexical chains, few distractors.
    ChainSpec spec;
    spec.hops = k;
    spec.entity_vocab = 60;
    spec.relation_vocab = 12;
    spec.num_claims = 300;
    spec.dev_fraction = 0.2;
    spec.distractor_ratio = 0.25;
    spec.seed = 500 + static_cast<std::uint64_t>(k);
    GeneratedData data = generate(spec);
    Corpus corpus = make_corpus(data);

    int argmax_hits = 0;
    for (std::uint64_t seed : seeds) {
      double best_la = -1.0;
      std::vector<int> best_h;
      for (int H = 1; H <= 5; ++H) {
        TrainConfig cfg;
        cfg.seed = seed;
        cfg.d = 32;
        cfg.heads = 4;
        cfg.hops = H;
        cfg.lr = 1e-3;
        cfg.epochs = 40;
        cfg.verifier_epochs = 30;
        RunResult r = train_and_eval(corpus, data.train_claims,
                                     data.dev_claims, cfg);
        std::cerr << "  [c5] k=" << k << " seed=" << seed << " H=" << H
                  << " LA=" << fmt(r.la) << "\n";
        if (r.la > best_la + 1e-12) {
          best_la = r.la;
          best_h.assign(1, H);
        } else if (std::abs(r.la - best_la) <= 1e-12) {
          best_h.push_back(H);
        }
      }
      if (std::find(best_h.begin(), best_h.end(), k) != best_h.end())
        ++argmax_hits;
    }
    if (argmax_hits < 2) pass = false;
    detail << " k=" << k << ":" << argmax_hits << "/3";
  }
  out.pass = pass;
  out.seconds = now_seconds() - t0;
  out.detail = "argmax at planted k:" + detail.str();
  return out;
}

Outcome criterion6(std::map<int, Corpus>& corpora,
                   std::map<int, GeneratedData>& datasets) {
  Outcome out;
  const double t0 = now_seconds();
  if (!corpora.count(2)) {
    datasets[2] = criterion_data(2);
    corpora[2] = make_corpus(datasets[2]);
  }
  const GeneratedData& data = datasets[2];
  const Corpus& corpus = corpora[2];

  // Retriever trained to convergence; the verifier phase is irrelevant for
  // recall, so it gets a token single epoch.
  Budget budget;
  budget.verifier_epochs = 1;
  TrainConfig cfg = full_config(2, 1, budget);
  RunResult r = train_and_eval(corpus, data.train_claims, data.dev_claims, cfg);
  out.pass = r.recall_at_h >= 0.9;
  out.seconds = now_seconds() - t0;
  out.detail = "recall@2 " + fmt(r.recall_at_h) + " on the k=2 dev set";
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7: determinism & persistence
// ---------------------------------------------------------------------------

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion7() {
  Outcome out;
  const double t0 = now_seconds();
  std::vector<std::string> failures;

  ChainSpec spec;
  spec.hops = 2;
  spec.entity_vocab = 25;
  spec.relation_vocab = 6;
  spec.num_claims = 30;
  spec.dev_fraction = 0.2;
  spec.distractor_ratio = 0.5;
  spec.seed = 77;
  GeneratedData data = generate(spec);
  Corpus corpus = make_corpus(data);

  TrainConfig cfg;
  cfg.seed = 3;
  cfg.d = 16;
  cfg.heads = 2;
  cfg.L_retriever = 1;
  cfg.L_verifier = 1;
  cfg.epochs = 3;
  cfg.neg_samples = 4;
  cfg.hard_negatives = 2;

  std::ostringstream sink1, sink2;
  TrainResult r1 = train<double>(corpus, data.train_claims, cfg, sink1);
  TrainResult r2 = train<double>(corpus, data.train_claims, cfg, sink2);

  const std::string p1 = "acceptance_run1.ckpt";
  const std::string p2 = "acceptance_run2.ckpt";
  save_checkpoint(r1.checkpoint, p1);
  save_checkpoint(r2.checkpoint, p2);
  if (file_bytes(p1) != file_bytes(p2))
    failures.push_back("checkpoint bytes differ");

  if (r1.metrics.size() != r2.metrics.size()) {
    failures.push_back("metric streams differ");
  } else {
    for (std::size_t i = 0; i < r1.metrics.size(); ++i)
      if (r1.metrics[i].phase != r2.metrics[i].phase ||
          r1.metrics[i].epoch != r2.metrics[i].epoch ||
          r1.metrics[i].loss != r2.metrics[i].loss)
        failures.push_back("metric streams differ");
  }

  // Metrics JSON from the two runs' dev evaluations.
  Model<double> m1 = model_from_checkpoint<double>(r1.checkpoint);
  Model<double> m2 = model_from_checkpoint<double>(r2.checkpoint);
  std::vector<Prediction> preds1 = predict_all(data.dev_claims, corpus, m1);
  std::vector<Prediction> preds2 = predict_all(data.dev_claims, corpus, m2);
  if (metrics_to_json(evaluate(preds1, data.dev_claims)) !=
      metrics_to_json(evaluate(preds2, data.dev_claims)))
    failures.push_back("metrics JSON differs");

  // Save -> load round trip leaves a fixed input's outputs bit-identical.
  Checkpoint reloaded = load_checkpoint(p1);
  Model<double> m3 = model_from_checkpoint<double>(reloaded);
  const CandidateIndex<double> idx1 = CandidateIndex<double>::build(corpus, m1);
  const CandidateIndex<double> idx3 = CandidateIndex<double>::build(corpus, m3);
  for (std::size_t i = 0; i < std::min<std::size_t>(data.dev_claims.size(), 10);
       ++i) {
    const Claim& c = data.dev_claims[i];
    Sentence claim = corpus.make_sentence("claim:" + c.claim_id, 0, c.text);
    auto [rr1, vr1] = predict_claim(claim, corpus, m1, idx1);
    auto [rr3, vr3] = predict_claim(claim, corpus, m3, idx3);
    if (rr1.picked != rr3.picked) failures.push_back("round-trip retrieval");
    for (int j = 0; j < 3; ++j)
      if (vr1.probs[static_cast<std::size_t>(j)] !=
          vr3.probs[static_cast<std::size_t>(j)])
        failures.push_back("round-trip probabilities");
  }
  std::remove(p1.c_str());
  std::remove(p2.c_str());

  out.pass = failures.empty();
  out.seconds = now_seconds() - t0;
  if (failures.empty()) {
    out.detail = "two runs bit-identical; round trip exact";
  } else {
    std::set<std::string> uniq(failures.begin(), failures.end());
    out.detail = "violations:";
    for (const auto& f : uniq) out.detail += " " + f;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  auto wanted = [&](int n) { return selected.empty() || selected.count(n); };

  const char* names[] = {"gradient fidelity",
                         "retrieval oracle equivalence",
                         "structural invariants",
                         "synthetic end-to-end",
                         "hop-sweep shape",
                         "chain recovery",
                         "determinism & persistence"};
  std::map<int, Outcome> results;

  // Cheap criteria first; 4-6 share the criterion-scale datasets.
  if (wanted(1)) results[1] = criterion1();
  if (wanted(2)) results[2] = criterion2();
  if (wanted(3)) results[3] = criterion3();
  if (wanted(7)) results[7] = criterion7();
  std::map<int, std::map<std::uint64_t, double>> full_la;
  std::map<int, Corpus> corpora;
  std::map<int, GeneratedData> datasets;
  if (wanted(4)) results[4] = criterion4(full_la, corpora, datasets);
  if (wanted(6)) results[6] = criterion6(corpora, datasets);
  if (wanted(5)) results[5] = criterion5();

  bool all = true;
  for (int n = 1; n <= 7; ++n) {
    if (!wanted(n)) continue;
    const Outcome& o = results[n];
    std::printf("criterion %d (%s): %s (%.1f s) — %s\n", n, names[n - 1],
                o.pass ? "PASS" : "FAIL", o.seconds, o.detail.c_str());
    if (!o.pass) all = false;
  }
  return all ? 0 : 1;
}
