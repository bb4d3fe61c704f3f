#include "coherentia/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace coherentia {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  ParseNode read_tree() {
    skip_space();
    if (pos_ == text_.size()) {
      throw ParseError(ParseError::Kind::EmptyNode, pos_, "empty input");
    }
    if (text_[pos_] != '(') {
      throw ParseError(ParseError::Kind::UnexpectedToken, pos_, "expected '('");
    }
    ParseNode root = read_node();
    skip_space();
    if (pos_ != text_.size()) {
      if (text_[pos_] == ')') {
        throw ParseError(ParseError::Kind::UnbalancedParens, pos_, "unmatched ')'");
      }
      throw ParseError(ParseError::Kind::UnexpectedToken, pos_, "trailing input after tree");
    }
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  bool at_end() const { return pos_ >= text_.size(); }

  std::string_view read_atom() {
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')') {
      ++pos_;
    }
    return text_.substr(begin, pos_ - begin);
  }

  // Precondition: text_[pos_] == '('.
  ParseNode read_node() {
    const std::size_t open = pos_++;
    ParseNode node;

    skip_space();
    if (at_end()) {
      throw ParseError(ParseError::Kind::UnbalancedParens, open, "unclosed '('");
    }
    if (text_[pos_] == ')') {
      throw ParseError(ParseError::Kind::EmptyNode, open, "'()'");
    }
    if (text_[pos_] != '(') node.label = std::string(read_atom());

    for (;;) {
      skip_space();
      if (at_end()) {
        throw ParseError(ParseError::Kind::UnbalancedParens, open, "unclosed '('");
      }
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        if (node.token) {
          throw ParseError(ParseError::Kind::UnexpectedToken, pos_, "subtree inside a leaf");
        }
        node.children.push_back(read_node());
        continue;
      }
      const std::size_t word_pos = pos_;
      std::string_view word = read_atom();
      if (node.token || !node.children.empty()) {
        throw ParseError(ParseError::Kind::UnexpectedToken, word_pos,
                         "bare word '" + std::string(word) + "'");
      }
      if (node.label.empty()) {
        throw ParseError(ParseError::Kind::UnexpectedToken, word_pos, "leaf without a tag");
      }
      node.token = Token{std::string(word), node.label};
    }

    if (!node.token && node.children.empty()) {
      if (node.label.empty()) throw ParseError(ParseError::Kind::EmptyNode, open, "'()'");
      throw ParseError(ParseError::Kind::MissingWord, open, "'(" + node.label + ")'");
    }
    return node;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void print(const ParseNode& node, std::string& out) {
  out += '(';
  out += node.label;
  if (node.token) {
    out += ' ';
    out += node.token->surface;
  } else {
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      if (i > 0 || !node.label.empty()) out += ' ';
      print(node.children[i], out);
    }
  }
  out += ')';
}

void collect_leaves(const ParseNode& node, std::vector<Token>& out) {
  if (node.token) {
    out.push_back(*node.token);
    return;
  }
  for (const auto& child : node.children) collect_leaves(child, out);
}

int binarize_into(const ParseNode& node, BinaryTree& tree, int& next_token) {
  if (node.token) {
    tree.nodes.push_back({-1, -1, next_token++});
    return static_cast<int>(tree.nodes.size()) - 1;
  }
  // Unary chains reduce to their lowest node.
  int acc = binarize_into(node.children.front(), tree, next_token);
  for (std::size_t i = 1; i < node.children.size(); ++i) {
    const int right = binarize_into(node.children[i], tree, next_token);
    tree.nodes.push_back({acc, right, -1});
    acc = static_cast<int>(tree.nodes.size()) - 1;
  }
  return acc;
}

}  // namespace

std::size_t BinaryTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::vector<int> BinaryTree::leaves() const {
  std::vector<int> out;
  if (nodes.empty()) return out;
  std::vector<int> stack{root()};
  while (!stack.empty()) {
    const Node& n = nodes[stack.back()];
    stack.pop_back();
    if (n.is_leaf()) {
      out.push_back(n.token);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return out;
}

CorpusError::CorpusError(const std::filesystem::path& file, std::size_t line,
                         const std::string& what)
    : DataError(file.string() + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                what),
      file_(file),
      line_(line) {}

EmptyDocument::EmptyDocument(const std::filesystem::path& file)
    : CorpusError(file, 0, "empty document") {}

ParseNode parse_bracketed(std::string_view text) { return BracketReader(text).read_tree(); }

std::string to_bracketed(const ParseNode& node) {
  std::string out;
  print(node, out);
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty() && out.back() != '(' && c != ')') out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

BinaryTree binarize(const ParseNode& tree) {
  BinaryTree out;
  int next_token = 0;
  binarize_into(tree, out, next_token);
  return out;
}

std::vector<Token> leaf_tokens(const ParseNode& tree) {
  std::vector<Token> out;
  collect_leaves(tree, out);
  return out;
}

Sentence make_sentence(const ParseNode& tree) {
  return Sentence{leaf_tokens(tree), binarize(tree), to_bracketed(tree)};
}

Sentence parse_sentence(std::string_view bracketed) {
  return make_sentence(parse_bracketed(bracketed));
}

std::vector<Token> extract_nouns(const Sentence& sentence,
                                 std::span<const std::string> noun_prefixes) {
  std::vector<Token> out;
  for (const Token& tok : sentence.tokens) {
    const bool noun = std::any_of(noun_prefixes.begin(), noun_prefixes.end(),
                                  [&](const std::string& p) { return tok.pos.starts_with(p); });
    if (noun) out.push_back(tok);
  }
  return out;
}

Document read_document(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CorpusError(file, 0, "cannot open file");

  Document doc;
  doc.id = file.stem().string();
  doc.source = file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), is_space)) continue;
    try {
      doc.sentences.push_back(parse_sentence(line));
    } catch (const ParseError& e) {
      throw CorpusError(file, line_no, e.what());
    }
  }
  if (doc.sentences.empty()) throw EmptyDocument(file);
  return doc;
}

std::vector<Document> load_corpus(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw CorpusError(root, 0, "not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().starts_with('.')) continue;
    files.push_back(entry.path());
  }

  std::vector<Document> docs;
  docs.reserve(files.size());
  for (const auto& f : files) docs.push_back(read_document(f));
  std::sort(docs.begin(), docs.end(),
            [](const Document& a, const Document& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].id == docs[i - 1].id) {
      throw CorpusError(docs[i].source, 0, "duplicate document id '" + docs[i].id + "'");
    }
  }
  return docs;
}

void write_document(const Document& doc, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw CorpusError(file, 0, "cannot open file for writing");
  for (const Sentence& s : doc.sentences) out << s.bracketed << '\n';
  if (!out) throw CorpusError(file, 0, "write failed");
}

Document reorder(const Document& doc, std::span<const std::size_t> order, std::string id) {
  Document out;
  out.id = std::move(id);
  out.sentences.reserve(order.size());
  for (std::size_t idx : order) out.sentences.push_back(doc.sentences.at(idx));
  return out;
}

}  // namespace coherentia
