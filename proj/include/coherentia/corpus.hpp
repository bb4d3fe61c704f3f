#ifndef COHERENTIA_CORPUS_HPP
#define COHERENTIA_CORPUS_HPP

// Corpus representation: bracketed constituency parses, binarized trees and
// noun (entity) extraction.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coherentia/errors.hpp"

namespace coherentia {

struct Token {
  std::string surface;
  std::string pos;

  bool operator==(const Token&) const = default;
};

// A node of a bracketed parse. Leaves carry a token and no children;
// internal nodes carry one or more children and no token.
struct ParseNode {
  std::string label;
  std::vector<ParseNode> children;
  std::optional<Token> token;

  bool is_leaf() const { return token.has_value(); }
  bool operator==(const ParseNode&) const = default;
};

// Binary tree stored in post-order: every child precedes its parent and the
// root is the last node. Leaves index into the owning sentence's tokens.
struct BinaryTree {
  struct Node {
    int left = -1;
    int right = -1;
    int token = -1;

    bool is_leaf() const { return token >= 0; }
  };

  std::vector<Node> nodes;

  int root() const { return static_cast<int>(nodes.size()) - 1; }
  std::size_t leaf_count() const;
  std::size_t internal_count() const { return nodes.size() - leaf_count(); }
  // Token indices of the leaves, left to right.
  std::vector<int> leaves() const;
};

struct Sentence {
  std::vector<Token> tokens;
  BinaryTree tree;
  // Canonical bracketed form of the source parse, used when rewriting
  // documents to disk.
  std::string bracketed;
};

struct Document {
  std::string id;
  std::vector<Sentence> sentences;
  // File the document was read from; empty for in-memory documents.
  std::filesystem::path source;
};

class CorpusError : public DataError {
 public:
  CorpusError(const std::filesystem::path& file, std::size_t line, const std::string& what);

  const std::filesystem::path& file() const { return file_; }
  // 1-based; 0 when the error concerns the whole file.
  std::size_t line() const { return line_; }

 private:
  std::filesystem::path file_;
  std::size_t line_;
};

class EmptyDocument : public CorpusError {
 public:
  explicit EmptyDocument(const std::filesystem::path& file);
};

ParseNode parse_bracketed(std::string_view text);

// Canonical printer: "(LABEL child child)" with leaves "(POS word)".
std::string to_bracketed(const ParseNode& node);

// Collapses whitespace runs to one space and drops spaces next to
// parentheses on the inner side, so that equivalent inputs compare equal.
std::string normalize_whitespace(std::string_view text);

// Left-branching binarization with unary chains collapsed. Labels are
// dropped. Leaf i of the result refers to token i of leaf_tokens(tree).
BinaryTree binarize(const ParseNode& tree);

std::vector<Token> leaf_tokens(const ParseNode& tree);

Sentence make_sentence(const ParseNode& tree);
Sentence parse_sentence(std::string_view bracketed);

// Chinese Treebank noun tags.
inline const std::vector<std::string> kDefaultNounPrefixes = {"NN", "NR", "NT"};

std::vector<Token> extract_nouns(const Sentence& sentence,
                                 std::span<const std::string> noun_prefixes = kDefaultNounPrefixes);

Document read_document(const std::filesystem::path& file);

// One document per regular file in root (hidden files skipped), id is the
// filename without its last extension. Sorted by id.
std::vector<Document> load_corpus(const std::filesystem::path& root);

void write_document(const Document& doc, const std::filesystem::path& file);

// Sentence-level reorder of a document; order[i] is the source index of the
// i-th output sentence.
Document reorder(const Document& doc, std::span<const std::size_t> order, std::string id);

}  // namespace coherentia

#endif  // COHERENTIA_CORPUS_HPP
