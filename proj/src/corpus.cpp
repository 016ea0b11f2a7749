#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "srmfv/text.hpp"

namespace srmfv {

using nlohmann::json;

Sentence Corpus::make_sentence(const std::string& doc_id, int sent_id,
                               const std::string& text) const {
  Sentence s;
  s.doc_id = doc_id;
  s.sent_id = sent_id;
  s.text = text;
  TokenizedText t = tokenize(text);
  s.tokens = std::move(t.tokens);
  s.capitalized = std::move(t.capitalized);
  s.token_ids.reserve(s.tokens.size());
  for (const auto& tok : s.tokens) s.token_ids.push_back(lookup(tok));
  return s;
}

Corpus ingest_corpus(const std::vector<CorpusRecord>& records,
                     int stop_set_size) {
  Corpus c;
  c.vocab_tokens = {"<pad>", "<unk>", "<cls>"};
  for (int i = 0; i < 3; ++i) c.vocab[c.vocab_tokens[i]] = i;

  std::unordered_set<std::string> keys;
  std::vector<long> freq(3, 0);
  for (const auto& r : records) {
    const std::string key = r.doc_id + "#" + std::to_string(r.sent_id);
    if (!keys.insert(key).second)
      throw DataError("ingest_corpus: duplicate sentence (" + r.doc_id + ", " +
                      std::to_string(r.sent_id) + ")");
    Sentence s;
    s.doc_id = r.doc_id;
    s.sent_id = r.sent_id;
    s.text = r.text;
    TokenizedText t = tokenize(r.text);
    s.tokens = std::move(t.tokens);
    s.capitalized = std::move(t.capitalized);
    for (const auto& tok : s.tokens) {
      auto it = c.vocab.find(tok);
      int id;
      if (it == c.vocab.end()) {
        id = static_cast<int>(c.vocab_tokens.size());
        c.vocab[tok] = id;
        c.vocab_tokens.push_back(tok);
        freq.push_back(0);
      } else {
        id = it->second;
      }
      ++freq[static_cast<std::size_t>(id)];
      s.token_ids.push_back(id);
    }
    c.sentences.push_back(std::move(s));
  }

  // Frequency stop-set: top `stop_set_size` ids, ties broken by lower id.
  std::vector<int> ids;
  for (int i = 3; i < static_cast<int>(freq.size()); ++i) ids.push_back(i);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (freq[static_cast<std::size_t>(a)] != freq[static_cast<std::size_t>(b)])
      return freq[static_cast<std::size_t>(a)] >
             freq[static_cast<std::size_t>(b)];
    return a < b;
  });
  c.cooc_stop.insert(kUnkId);
  for (int i = 0; i < stop_set_size && i < static_cast<int>(ids.size()); ++i)
    c.cooc_stop.insert(ids[static_cast<std::size_t>(i)]);

  c.token_weight.resize(freq.size());
  for (std::size_t i = 0; i < freq.size(); ++i)
    c.token_weight[i] = 1.0 / static_cast<double>(std::max<long>(1, freq[i]));
  return c;
}

std::string label_name(Label l) {
  switch (l) {
    case Label::Supported: return "SUPPORTED";
    case Label::Refuted: return "REFUTED";
    case Label::NotEnoughInfo: return "NOT_ENOUGH_INFO";
  }
  throw DataError("label_name: bad label");
}

Label parse_label(const std::string& s) {
  if (s == "SUPPORTED") return Label::Supported;
  if (s == "REFUTED") return Label::Refuted;
  if (s == "NOT_ENOUGH_INFO") return Label::NotEnoughInfo;
  throw DataError("parse_label: unknown label '" + s + "'");
}

std::vector<CorpusRecord> read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::vector<CorpusRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("doc_id") || !j.contains("sent_id") || !j.contains("text"))
      throw FormatError(path + ":" + std::to_string(lineno) +
                        ": corpus record needs doc_id, sent_id, text");
    out.push_back({j["doc_id"].get<std::string>(), j["sent_id"].get<int>(),
                   j["text"].get<std::string>()});
  }
  return out;
}

std::vector<Claim> read_claims_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open claims file: " + path);
  std::vector<Claim> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    Claim c;
    c.claim_id = j.at("claim_id").get<std::string>();
    c.text = j.at("text").get<std::string>();
    c.label = parse_label(j.at("label").get<std::string>());
    for (const auto& ref : j.at("gold_chain")) {
      c.gold_chain.emplace_back(ref.at(0).get<std::string>(),
                                ref.at(1).get<int>());
    }
    if (c.gold_chain.empty() && c.label != Label::NotEnoughInfo)
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": empty gold_chain on a " + label_name(c.label) +
                      " claim");
    out.push_back(std::move(c));
  }
  return out;
}

void write_corpus_jsonl(const std::string& path,
                        const std::vector<CorpusRecord>& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& r : records) {
    json j{{"doc_id", r.doc_id}, {"sent_id", r.sent_id}, {"text", r.text}};
    out << j.dump() << "\n";
  }
}

void write_claims_jsonl(const std::string& path,
                        const std::vector<Claim>& claims) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write claims file: " + path);
  for (const auto& c : claims) {
    json chain = json::array();
    for (const auto& [doc, sent] : c.gold_chain)
      chain.push_back(json::array({doc, sent}));
    json j{{"claim_id", c.claim_id},
           {"text", c.text},
           {"label", label_name(c.label)},
           {"gold_chain", chain}};
    out << j.dump() << "\n";
  }
}

}  // namespace srmfv
