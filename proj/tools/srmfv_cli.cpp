// Command-line front end: benchmark generation, training, evaluation,
// single-claim retrieval/verification, hop sweeps, and gradient checking.
//
// Machine-readable JSON goes to stdout; progress and human-readable tables
// go to stderr. Exit codes: 0 success, 1 usage, 2 data/format/config
// problems, 3 numerical failures.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "srmfv/grad_check.hpp"
#include "srmfv/synthbench.hpp"
#include "srmfv/trainer.hpp"

using nlohmann::json;

namespace {

struct ConfigCli {
  std::string config_path;
  // Optional overrides; CLI11 fills the bool when the flag is present.
  std::int64_t seed = -1;
  int d = -1, L_retriever = -1, L_verifier = -1, heads = -1, hops = -1;
  double tau = -1.0, gamma = -1.0, lr = -1.0;
  int epochs = -1, verifier_epochs = -1, batch_size = -1, neg_samples = -1,
      hard_negatives = -1;
  std::string schedule;
  bool concat_query = false, single_hop = false, unified_graph = false,
       gat_encoder = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path,
                    "JSON config file; flags below override its values");
    app->add_option("--seed", seed, "RNG seed (also SRMFV_SEED env)");
    app->add_option("--d", d, "model width");
    app->add_option("--layers-retriever", L_retriever, "GAT layer count");
    app->add_option("--layers-verifier", L_verifier, "encoder layer count");
    app->add_option("--heads", heads, "attention head count");
    app->add_option("--hops", hops, "retrieval hop budget");
    app->add_option("--tau", tau, "latent edge threshold");
    app->add_option("--gamma", gamma, "retrieval softmax temperature");
    app->add_option("--lr", lr, "Adam learning rate");
    app->add_option("--epochs", epochs, "epochs per phase");
    app->add_option("--verifier-epochs", verifier_epochs,
                    "verifier-phase epochs (default: same as --epochs)");
    app->add_option("--batch-size", batch_size, "gradient accumulation size");
    app->add_option("--neg-samples", neg_samples, "negatives per hop");
    app->add_option("--hard-negatives", hard_negatives,
                    "mined hard negatives per hop (0 disables mining)");
    app->add_option("--schedule", schedule, "staged | joint");
    app->add_flag("--concat-query", concat_query,
                  "ablation: mean-pooled query instead of graph encoding");
    app->add_flag("--single-hop", single_hop,
                  "ablation: one-shot top-H retrieval");
    app->add_flag("--unified-graph", unified_graph,
                  "ablation: verify on the final graph only");
    app->add_flag("--gat-encoder", gat_encoder,
                  "ablation: sentence-level GAT instead of nested encoder");
  }

  srmfv::TrainConfig resolve() const {
    srmfv::TrainConfig c;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw srmfv::DataError("cannot open config " + config_path);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw srmfv::FormatError("config " + config_path + ": " + e.what());
      }
      c = srmfv::config_from_json(j);
    }
    if (const char* env = std::getenv("SRMFV_SEED")) {
      c.seed = static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
    }
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    if (d > 0) c.d = d;
    if (L_retriever > 0) c.L_retriever = L_retriever;
    if (L_verifier > 0) c.L_verifier = L_verifier;
    if (heads > 0) c.heads = heads;
    if (hops > 0) c.hops = hops;
    if (tau > 0) c.tau = tau;
    if (gamma > 0) c.gamma = gamma;
    if (lr > 0) c.lr = lr;
    if (epochs > 0) c.epochs = epochs;
    if (verifier_epochs > 0) c.verifier_epochs = verifier_epochs;
    if (batch_size > 0) c.batch_size = batch_size;
    if (neg_samples > 0) c.neg_samples = neg_samples;
    if (hard_negatives >= 0) c.hard_negatives = hard_negatives;
    if (!schedule.empty()) c.schedule = schedule;
    if (concat_query) c.concat_query = true;
    if (single_hop) c.single_hop = true;
    if (unified_graph) c.unified_graph = true;
    if (gat_encoder) c.gat_encoder = true;
    c.validate();
    return c;
  }
};

srmfv::Corpus load_corpus(const std::string& path) {
  return srmfv::ingest_corpus(srmfv::read_corpus_jsonl(path));
}

json epoch_metrics_json(const std::vector<srmfv::EpochMetric>& ms) {
  json out = json::array();
  for (const auto& m : ms)
    out.push_back({{"phase", m.phase}, {"epoch", m.epoch}, {"loss", m.loss}});
  return out;
}

json metrics_json(const srmfv::MetricsRecord& m) {
  return json::parse(srmfv::metrics_to_json(m));
}

void print_metrics_table(const srmfv::MetricsRecord& m, std::ostream& os) {
  os << "  label accuracy  " << m.la << "\n"
     << "  strict score    " << m.strict_score << "\n"
     << "  precision       " << m.precision << "\n"
     << "  recall          " << m.recall << "\n"
     << "  f1              " << m.f1 << "\n";
  for (std::size_t t = 0; t < m.per_hop.size(); ++t)
    os << "  recall@" << (t + 1) << "        " << m.per_hop[t] << "\n";
}

srmfv::MetricsRecord eval_checkpoint(const srmfv::Checkpoint& ckpt,
                                     const srmfv::Corpus& corpus,
                                     const std::vector<srmfv::Claim>& claims,
                                     int jobs) {
  srmfv::Model<float> model = srmfv::model_from_checkpoint<float>(ckpt);
  auto preds = srmfv::predict_all(claims, corpus, model, jobs);
  return srmfv::evaluate(preds, claims);
}

int cmd_gen(const srmfv::ChainSpec& spec, const std::string& out_dir) {
  srmfv::GeneratedData data = srmfv::generate(spec);
  const std::string corpus_path = out_dir + "/corpus.jsonl";
  const std::string train_path = out_dir + "/train.jsonl";
  const std::string dev_path = out_dir + "/dev.jsonl";
  srmfv::write_corpus_jsonl(corpus_path, data.corpus);
  srmfv::write_claims_jsonl(train_path, data.train_claims);
  srmfv::write_claims_jsonl(dev_path, data.dev_claims);
  json out{{"corpus", corpus_path},
           {"train", train_path},
           {"dev", dev_path},
           {"corpus_sentences", data.corpus.size()},
           {"train_claims", data.train_claims.size()},
           {"dev_claims", data.dev_claims.size()},
           {"spec",
            {{"hops", spec.hops},
             {"entity_vocab", spec.entity_vocab},
             {"relation_vocab", spec.relation_vocab},
             {"num_claims", spec.num_claims},
             {"dev_fraction", spec.dev_fraction},
             {"corpus_size", spec.corpus_size},
             {"distractor_ratio", spec.distractor_ratio},
             {"seed", spec.seed}}}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_train(const ConfigCli& cc, const std::string& corpus_path,
              const std::string& claims_path, const std::string& out_path) {
  const srmfv::TrainConfig cfg = cc.resolve();
  srmfv::Corpus corpus = load_corpus(corpus_path);
  auto claims = srmfv::read_claims_jsonl(claims_path);
  std::cerr << "training on " << claims.size() << " claims over "
            << corpus.sentences.size() << " sentences\n";
  srmfv::TrainResult res = srmfv::train<float>(corpus, claims, cfg, std::cerr);
  srmfv::save_checkpoint(res.checkpoint, out_path);
  json out{{"checkpoint", out_path},
           {"config", srmfv::to_json(cfg)},
           {"epochs", epoch_metrics_json(res.metrics)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_eval(const std::string& corpus_path, const std::string& claims_path,
             const std::string& ckpt_path, int jobs,
             const std::string& csv_path, const std::string& pred_path) {
  srmfv::Checkpoint ckpt = srmfv::load_checkpoint(ckpt_path);
  srmfv::Corpus corpus = load_corpus(corpus_path);
  auto claims = srmfv::read_claims_jsonl(claims_path);
  srmfv::Model<float> model = srmfv::model_from_checkpoint<float>(ckpt);
  auto preds = srmfv::predict_all(claims, corpus, model, jobs);
  srmfv::MetricsRecord m = srmfv::evaluate(preds, claims);
  std::cerr << "evaluated " << claims.size() << " claims\n";
  print_metrics_table(m, std::cerr);
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw srmfv::DataError("cannot open " + csv_path);
    csv << srmfv::metrics_to_csv(m);
  }
  if (!pred_path.empty()) {
    std::ofstream pf(pred_path);
    if (!pf) throw srmfv::DataError("cannot open " + pred_path);
    for (const auto& p : preds) {
      json refs = json::array();
      for (const auto& [doc, sid] : p.retrieved)
        refs.push_back(json::array({doc, sid}));
      pf << json{{"claim_id", p.claim_id},
                 {"label", srmfv::label_name(p.label)},
                 {"retrieved", refs}}
                .dump()
         << "\n";
    }
  }
  json out{{"config", srmfv::to_json(ckpt.config)},
           {"metrics", metrics_json(m)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_retrieve(const std::string& corpus_path, const std::string& ckpt_path,
                 const std::string& claim_text, int hops_override) {
  srmfv::Checkpoint ckpt = srmfv::load_checkpoint(ckpt_path);
  srmfv::Model<float> model = srmfv::model_from_checkpoint<float>(ckpt);
  srmfv::Corpus corpus = load_corpus(corpus_path);
  srmfv::Sentence claim = corpus.make_sentence("claim:cli", 0, claim_text);
  const auto index = srmfv::CandidateIndex<float>::build(corpus, model);
  const int hops = hops_override > 0 ? hops_override : model.cfg.hops;
  srmfv::RetrievalResult rr =
      srmfv::run_multihop(claim, corpus, model, hops, index);
  json hits = json::array();
  for (std::size_t t = 0; t < rr.picked.size(); ++t) {
    const auto& s =
        corpus.sentences[static_cast<std::size_t>(rr.picked[t])];
    hits.push_back({{"doc_id", s.doc_id},
                    {"sent_id", s.sent_id},
                    {"text", s.text},
                    {"score", rr.picked_scores[t]}});
    std::cerr << "hop " << (t + 1) << ": [" << s.doc_id << "#" << s.sent_id
              << "] " << s.text << " (score " << rr.picked_scores[t] << ")\n";
  }
  json out{{"claim", claim_text},
           {"hops", hops},
           {"retrieved", hits},
           {"config", srmfv::to_json(model.cfg)}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& corpus_path, const std::string& ckpt_path,
               const std::string& claim_text) {
  srmfv::Checkpoint ckpt = srmfv::load_checkpoint(ckpt_path);
  srmfv::Model<float> model = srmfv::model_from_checkpoint<float>(ckpt);
  srmfv::Corpus corpus = load_corpus(corpus_path);
  srmfv::Sentence claim = corpus.make_sentence("claim:cli", 0, claim_text);
  const auto index = srmfv::CandidateIndex<float>::build(corpus, model);
  auto [rr, vr] = srmfv::predict_claim(claim, corpus, model, index);
  json hits = json::array();
  for (int idx : rr.picked) {
    const auto& s = corpus.sentences[static_cast<std::size_t>(idx)];
    hits.push_back(
        {{"doc_id", s.doc_id}, {"sent_id", s.sent_id}, {"text", s.text}});
  }
  json out{{"claim", claim_text},
           {"label", srmfv::label_name(vr.label)},
           {"probs",
            {{"SUPPORTED", vr.probs[0]},
             {"REFUTED", vr.probs[1]},
             {"NOT_ENOUGH_INFO", vr.probs[2]}}},
           {"fusion_weights", vr.fusion_weights},
           {"retrieved", hits},
           {"config", srmfv::to_json(model.cfg)}};
  std::cerr << "label: " << srmfv::label_name(vr.label) << "\n";
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const ConfigCli& cc, const std::string& corpus_path,
              const std::string& train_path, const std::string& dev_path,
              const std::vector<int>& hop_values, int jobs) {
  const srmfv::TrainConfig base = cc.resolve();
  srmfv::Corpus corpus = load_corpus(corpus_path);
  auto train_claims = srmfv::read_claims_jsonl(train_path);
  auto dev_claims = srmfv::read_claims_jsonl(dev_path);
  json rows = json::array();
  std::cerr << "hops  la  strict  recall\n";
  for (int h : hop_values) {
    srmfv::TrainConfig cfg = base;
    cfg.hops = h;
    srmfv::TrainResult res =
        srmfv::train<float>(corpus, train_claims, cfg, std::cerr);
    srmfv::MetricsRecord m =
        eval_checkpoint(res.checkpoint, corpus, dev_claims, jobs);
    std::cerr << h << "  " << m.la << "  " << m.strict_score << "  "
              << m.recall << "\n";
    rows.push_back({{"hops", h}, {"metrics", metrics_json(m)}});
  }
  json out{{"config", srmfv::to_json(base)}, {"sweep", rows}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, double tol) {
  // Tiny planted instance, checked end to end in double precision.
  srmfv::ChainSpec spec;
  spec.hops = 2;
  spec.num_claims = 3;
  spec.entity_vocab = 10;
  spec.relation_vocab = 4;
  spec.dev_fraction = 0.0;
  spec.seed = seed;
  srmfv::GeneratedData data = srmfv::generate(spec);
  srmfv::Corpus corpus = srmfv::ingest_corpus(data.corpus);

  srmfv::TrainConfig cfg;
  cfg.seed = seed;
  cfg.d = 8;
  cfg.heads = 2;
  cfg.L_retriever = 1;
  cfg.L_verifier = 1;
  srmfv::Rng rng(seed);
  srmfv::Model<double> model = srmfv::Model<double>::init(
      cfg, static_cast<int>(corpus.vocab_tokens.size()), rng);

  const srmfv::Claim* target = nullptr;
  for (const auto& c : data.train_claims)
    if (!c.gold_chain.empty()) {
      target = &c;
      break;
    }
  if (!target) throw srmfv::DataError("gradcheck: no claim with a gold chain");
  srmfv::Sentence claim =
      corpus.make_sentence("claim:" + target->claim_id, 0, target->text);
  std::vector<srmfv::Sentence> chain;
  for (const auto& [doc, sid] : target->gold_chain)
    for (const auto& s : corpus.sentences)
      if (s.doc_id == doc && s.sent_id == sid) chain.push_back(s);

  // Graph structure is held fixed; sem_W only shapes the discrete latent
  // edges, so it carries no gradient and stays out of the checked set.
  srmfv::SubgraphSequence seq =
      srmfv::make_sequence(claim, chain, model, corpus);
  auto verif_loss = [&]() {
    auto [probs, alpha] = srmfv::verify_forward(seq, model);
    (void)alpha;
    return srmfv::verification_loss(probs, target->label);
  };
  const double verr = srmfv::grad_check<double>(
      std::function<srmfv::Tensor<double>()>(verif_loss),
      model.verifier_param_list());

  srmfv::Rng neg_rng(seed + 17);
  std::vector<int> gold_idx;
  for (const auto& [doc, sid] : target->gold_chain)
    for (std::size_t i = 0; i < corpus.sentences.size(); ++i)
      if (corpus.sentences[i].doc_id == doc &&
          corpus.sentences[i].sent_id == sid)
        gold_idx.push_back(static_cast<int>(i));
  // The negative sample draw must repeat across finite-difference calls.
  const auto rng_snapshot = neg_rng.state();
  auto retr_loss = [&]() {
    neg_rng.set_state(rng_snapshot);
    return srmfv::claim_retrieval_loss(claim, chain, gold_idx, corpus, model,
                                       neg_rng);
  };
  const double rerr = srmfv::grad_check<double>(
      std::function<srmfv::Tensor<double>()>(retr_loss),
      model.retriever_param_list());

  const double worst = std::max(verr, rerr);
  std::cerr << "verifier loss max rel err  " << verr << "\n"
            << "retrieval loss max rel err " << rerr << "\n";
  json out{{"verifier_max_rel_err", verr},
           {"retrieval_max_rel_err", rerr},
           {"tolerance", tol},
           {"pass", worst <= tol}};
  std::cout << out.dump(2) << "\n";
  if (worst > tol)
    throw srmfv::NumericError("gradient check exceeded tolerance");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structural multi-hop fact verification pipeline"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a planted-chain benchmark");
  srmfv::ChainSpec spec;
  std::string gen_out = ".";
  std::int64_t gen_seed = -1;
  gen->add_option("--hops", spec.hops, "chain length k");
  gen->add_option("--entities", spec.entity_vocab, "entity vocabulary size");
  gen->add_option("--relations", spec.relation_vocab,
                  "relation vocabulary size");
  gen->add_option("--claims", spec.num_claims, "number of claims");
  gen->add_option("--dev-fraction", spec.dev_fraction, "dev split fraction");
  gen->add_option("--corpus-size", spec.corpus_size,
                  "total corpus sentences (0: use distractor ratio)");
  gen->add_option("--distractor-ratio", spec.distractor_ratio,
                  "distractors per chain sentence");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory");

  // train
  auto* train = app.add_subcommand("train", "train a model");
  ConfigCli train_cfg;
  std::string train_corpus, train_claims, train_out = "model.ckpt";
  train->add_option("--corpus", train_corpus, "corpus JSONL")->required();
  train->add_option("--claims", train_claims, "claims JSONL")->required();
  train->add_option("--out", train_out, "checkpoint output path");
  train_cfg.attach(train);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_corpus, eval_claims, eval_ckpt, eval_csv, eval_preds;
  int eval_jobs = 1;
  eval->add_option("--corpus", eval_corpus, "corpus JSONL")->required();
  eval->add_option("--claims", eval_claims, "claims JSONL")->required();
  eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval->add_option("--jobs", eval_jobs, "parallel workers");
  eval->add_option("--csv", eval_csv, "also write metrics CSV here");
  eval->add_option("--predictions", eval_preds,
                   "also write per-claim predictions JSONL here");

  // retrieve
  auto* retr = app.add_subcommand("retrieve", "multi-hop retrieval for a claim");
  std::string retr_corpus, retr_ckpt, retr_claim;
  int retr_hops = -1;
  retr->add_option("--corpus", retr_corpus, "corpus JSONL")->required();
  retr->add_option("--checkpoint", retr_ckpt, "model checkpoint")->required();
  retr->add_option("--claim", retr_claim, "claim text")->required();
  retr->add_option("--hops", retr_hops, "override hop budget");

  // verify
  auto* verify = app.add_subcommand("verify", "retrieve and classify a claim");
  std::string ver_corpus, ver_ckpt, ver_claim;
  verify->add_option("--corpus", ver_corpus, "corpus JSONL")->required();
  verify->add_option("--checkpoint", ver_ckpt, "model checkpoint")->required();
  verify->add_option("--claim", ver_claim, "claim text")->required();

  // sweep
  auto* sweep = app.add_subcommand("sweep", "train/eval across hop budgets");
  ConfigCli sweep_cfg;
  std::string sweep_corpus, sweep_train, sweep_dev;
  std::vector<int> sweep_hops{1, 2, 3};
  int sweep_jobs = 1;
  sweep->add_option("--corpus", sweep_corpus, "corpus JSONL")->required();
  sweep->add_option("--train", sweep_train, "training claims JSONL")
      ->required();
  sweep->add_option("--dev", sweep_dev, "dev claims JSONL")->required();
  sweep->add_option("--hop-values", sweep_hops, "hop budgets to sweep");
  sweep->add_option("--jobs", sweep_jobs, "parallel eval workers");
  sweep_cfg.attach(sweep);

  // gradcheck
  auto* gc = app.add_subcommand(
      "gradcheck", "finite-difference gradient check in double precision");
  std::uint64_t gc_seed = 1;
  double gc_tol = 1e-4;
  gc->add_option("--seed", gc_seed, "seed");
  gc->add_option("--tol", gc_tol, "max relative error tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      if (gen_seed >= 0) spec.seed = static_cast<std::uint64_t>(gen_seed);
      else if (const char* env = std::getenv("SRMFV_SEED"))
        spec.seed = static_cast<std::uint64_t>(std::strtoull(env, nullptr, 10));
      return cmd_gen(spec, gen_out);
    }
    if (train->parsed())
      return cmd_train(train_cfg, train_corpus, train_claims, train_out);
    if (eval->parsed())
      return cmd_eval(eval_corpus, eval_claims, eval_ckpt, eval_jobs, eval_csv,
                      eval_preds);
    if (retr->parsed())
      return cmd_retrieve(retr_corpus, retr_ckpt, retr_claim, retr_hops);
    if (verify->parsed()) return cmd_verify(ver_corpus, ver_ckpt, ver_claim);
    if (sweep->parsed())
      return cmd_sweep(sweep_cfg, sweep_corpus, sweep_train, sweep_dev,
                       sweep_hops, sweep_jobs);
    if (gc->parsed()) return cmd_gradcheck(gc_seed, gc_tol);
  } catch (const srmfv::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const srmfv::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    // DataError / FormatError / ConfigError / filesystem problems.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
