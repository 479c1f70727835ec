#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dffn {

enum class Label { Good, PotentiallyUseful, Bad };
enum class TaskVariant { ThreeClass2015, Binary2016 };

const char* to_string(Label label);
Label label_from_name(std::string_view name);  // strict enum-name lookup
const char* to_string(TaskVariant variant);
TaskVariant variant_from_name(std::string_view name);  // "2015"/"2016" also accepted

struct Token {
  std::string text;      // lowercased
  std::string original;  // surface form, case preserved
};

struct Question {
  std::string id;
  std::string category;
  std::string author_id;
  std::string subject;
  std::string body;
};

struct Answer {
  std::string id;
  std::string author_id;
  std::string body;
  std::optional<Label> gold_label;  // absent on unlabeled (predict-time) splits
  int position = 0;                 // 1-based, contiguous within the thread
};

struct Thread {
  Question question;
  std::vector<Answer> answers;
};

struct LabelCounts {
  long good = 0;
  long potential = 0;
  long bad = 0;

  long total() const { return good + potential + bad; }
  void add(Label label);
};

// Per-author / per-category gold-label counts over the training split.
using AuthorStats = std::map<std::string, LabelCounts>;
using CategoryStats = std::map<std::string, LabelCounts>;

struct CorpusStats {
  AuthorStats authors;
  CategoryStats categories;
};

// Attribute/tag names of one XML dialect plus its label synonym table.
// The fixture dialect is the schema documented in the README; the SemEval
// presets cover the two shared-task file layouts. Every field can be
// overridden from a key=value config (see dialect_from_config).
struct XmlDialect {
  std::string question_tag = "Question";
  std::string question_wrapper_tag;  // e.g. "Thread"; empty = questions sit at the root
  std::string q_id_attr = "QID";
  std::string q_category_attr = "CATEGORY";
  std::string q_author_attr = "QUSERID";
  std::string q_subject_tag = "QSubject";
  std::string q_body_tag = "QBody";
  std::string comment_tag = "Comment";
  std::string c_id_attr = "CID";
  std::string c_author_attr = "CUSERID";
  std::string c_gold_attr = "CGOLD";
  std::string c_body_tag = "CBody";
  // Lowercased raw label -> Label, consulted after the built-in names.
  std::map<std::string, Label> label_synonyms;

  static XmlDialect fixture(TaskVariant variant);
  static XmlDialect semeval2015();
  static XmlDialect semeval2016();
};

// Case-insensitive label normalization: good / bad / potential[ly[ ]useful]
// plus the dialect's synonym table. Unmapped strings raise LabelError.
Label normalize_label(std::string_view raw,
                      const std::map<std::string, Label>& synonyms = {});

// Lowercased word tokens split on whitespace and punctuation. URL, e-mail
// and emoticon chunks survive as single tokens.
std::vector<Token> tokenize(std::string_view text);

// Emoticon surface forms shared by the tokenizer and the surface features.
bool is_happy_emoticon(std::string_view chunk);
bool is_sad_emoticon(std::string_view chunk);
bool is_url_token(std::string_view token);
bool is_email_token(std::string_view token);

std::vector<Thread> parse_threads(std::string_view xml, TaskVariant variant);
std::vector<Thread> parse_threads(std::string_view xml, TaskVariant variant,
                                  const XmlDialect& dialect);

// Picks a built-in dialect by probing the root's child element names;
// falls back to the fixture dialect.
XmlDialect detect_dialect(std::string_view xml, TaskVariant variant);

// Gold-label counts per author and category. Every answer must be labeled.
CorpusStats compute_stats(const std::vector<Thread>& threads);

// Canonical JSON-lines interchange: one thread per line.
std::string thread_to_json(const Thread& thread);
Thread thread_from_json(std::string_view json_line);
void write_threads_jsonl(std::ostream& out, const std::vector<Thread>& threads);
std::vector<Thread> read_threads_jsonl(std::istream& in);

// Total QA-pair count, i.e. sum of answers over threads.
std::size_t count_pairs(const std::vector<Thread>& threads);

// Question text used everywhere downstream: subject and body joined.
std::string question_text(const Question& question);

}  // namespace dffn
