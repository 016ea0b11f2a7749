#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "srmfv/error.hpp"

namespace srmfv {

// Reserved vocabulary ids.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;

/// Lowercased tokens plus a flag per token recording whether the surface
/// form started with an uppercase letter (used for mention matching).
struct TokenizedText {
  std::vector<std::string> tokens;
  std::vector<bool> capitalized;
};

/// Lowercase, split on whitespace and punctuation boundaries. Each
/// non-alphanumeric, non-space character becomes its own token.
/// Empty or whitespace-only input is an error.
TokenizedText tokenize(const std::string& text);

struct Sentence {
  std::string doc_id;
  int sent_id = 0;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<bool> capitalized;
  std::vector<int> token_ids;  // filled against a corpus vocabulary
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::unordered_map<std::string, int> vocab;  // token -> dense id
  std::vector<std::string> vocab_tokens;       // id -> token
  // Ids excluded from co-occurrence edges: the 25 most frequent corpus
  // tokens plus UNK.
  std::unordered_set<int> cooc_stop;
  // Inverse corpus frequency per vocabulary id (1/occurrences, 1.0 for ids
  // never seen). Used to weight token embeddings so rare, content-bearing
  // tokens dominate pooled representations.
  std::vector<double> token_weight;

  int lookup(const std::string& token) const {
    auto it = vocab.find(token);
    return it == vocab.end() ? kUnkId : it->second;
  }

  /// Tokenize free text and map to ids under this corpus vocabulary.
  Sentence make_sentence(const std::string& doc_id, int sent_id,
                         const std::string& text) const;
};

struct CorpusRecord {
  std::string doc_id;
  int sent_id = 0;
  std::string text;
};

/// Build a corpus with a dense, ingestion-ordered vocabulary. Duplicate
/// (doc_id, sent_id) pairs are an error naming the duplicate.
Corpus ingest_corpus(const std::vector<CorpusRecord>& records,
                     int stop_set_size = 25);

/// Parse a JSON Lines corpus file ({"doc_id", "sent_id", "text"} per line).
std::vector<CorpusRecord> read_corpus_jsonl(const std::string& path);

enum class Label { Supported = 0, Refuted = 1, NotEnoughInfo = 2 };

std::string label_name(Label l);
Label parse_label(const std::string& s);

struct Claim {
  std::string claim_id;
  std::string text;
  Label label = Label::NotEnoughInfo;
  std::vector<std::pair<std::string, int>> gold_chain;  // (doc_id, sent_id)
};

/// Parse a JSON Lines claims file. A gold chain may be empty only for
/// NOT_ENOUGH_INFO claims.
std::vector<Claim> read_claims_jsonl(const std::string& path);

void write_corpus_jsonl(const std::string& path,
                        const std::vector<CorpusRecord>& records);
void write_claims_jsonl(const std::string& path,
                        const std::vector<Claim>& claims);

}  // namespace srmfv
