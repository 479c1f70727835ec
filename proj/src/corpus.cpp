#include "dffn/corpus.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "dffn/errors.h"
#include "dffn/xml.h"

namespace dffn {

using nlohmann::json;

const char* to_string(Label label) {
  switch (label) {
    case Label::Good: return "Good";
    case Label::PotentiallyUseful: return "PotentiallyUseful";
    case Label::Bad: return "Bad";
  }
  return "?";
}

Label label_from_name(std::string_view name) {
  if (name == "Good") return Label::Good;
  if (name == "PotentiallyUseful") return Label::PotentiallyUseful;
  if (name == "Bad") return Label::Bad;
  throw LabelError("unknown label name \"" + std::string(name) + "\"");
}

const char* to_string(TaskVariant variant) {
  return variant == TaskVariant::ThreeClass2015 ? "2015" : "2016";
}

TaskVariant variant_from_name(std::string_view name) {
  if (name == "2015" || name == "ThreeClass2015" || name == "three-class") {
    return TaskVariant::ThreeClass2015;
  }
  if (name == "2016" || name == "Binary2016" || name == "binary") {
    return TaskVariant::Binary2016;
  }
  throw ConfigError("unknown task variant \"" + std::string(name) + "\"");
}

void LabelCounts::add(Label label) {
  switch (label) {
    case Label::Good: ++good; break;
    case Label::PotentiallyUseful: ++potential; break;
    case Label::Bad: ++bad; break;
  }
}

namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::set<std::string>& happy_lexicon() {
  static const std::set<std::string> lex = {
      ":)", ":-)", ":]", ":d", ":-d", "=)", "=d", ";)", ";-)", "xd", ":p", ":-p", "<3",
  };
  return lex;
}

const std::set<std::string>& sad_lexicon() {
  static const std::set<std::string> lex = {
      ":(", ":-(", ":[", ":'(", ":'-(", "=(", "d:", ":/", ":-/", ":|",
  };
  return lex;
}

bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;  // keep UTF-8 sequences inside words
}

}  // namespace

bool is_happy_emoticon(std::string_view chunk) {
  return happy_lexicon().count(ascii_lower(chunk)) > 0;
}

bool is_sad_emoticon(std::string_view chunk) {
  return sad_lexicon().count(ascii_lower(chunk)) > 0;
}

bool is_url_token(std::string_view token) {
  const std::string low = ascii_lower(token);
  return low.starts_with("http://") || low.starts_with("https://") ||
         low.starts_with("ftp://") || low.starts_with("www.");
}

bool is_email_token(std::string_view token) {
  const std::size_t at = token.find('@');
  if (at == 0 || at == std::string_view::npos || at + 1 >= token.size()) return false;
  if (token.find('@', at + 1) != std::string_view::npos) return false;
  const std::size_t dot = token.find('.', at + 2);
  return dot != std::string_view::npos && dot + 1 < token.size();
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) {
      ++end;
    }
    std::string_view chunk = text.substr(i, end - i);
    if (is_url_token(chunk) || is_email_token(chunk) || is_happy_emoticon(chunk) ||
        is_sad_emoticon(chunk)) {
      tokens.push_back({ascii_lower(chunk), std::string(chunk)});
    } else {
      std::size_t j = 0;
      while (j < chunk.size()) {
        if (is_word_char(static_cast<unsigned char>(chunk[j]))) {
          std::size_t k = j;
          while (k < chunk.size() && is_word_char(static_cast<unsigned char>(chunk[k]))) {
            ++k;
          }
          std::string_view word = chunk.substr(j, k - j);
          tokens.push_back({ascii_lower(word), std::string(word)});
          j = k;
        } else {
          std::string_view punct = chunk.substr(j, 1);
          tokens.push_back({std::string(punct), std::string(punct)});
          ++j;
        }
      }
    }
    i = end;
  }
  return tokens;
}

Label normalize_label(std::string_view raw, const std::map<std::string, Label>& synonyms) {
  std::string low = ascii_lower(raw);
  // trim
  const auto first = low.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw LabelError("empty label string");
  const auto last = low.find_last_not_of(" \t\r\n");
  low = low.substr(first, last - first + 1);

  if (low == "good") return Label::Good;
  if (low == "bad") return Label::Bad;
  if (low == "potential" || low == "potentially useful" || low == "potentiallyuseful") {
    return Label::PotentiallyUseful;
  }
  if (auto it = synonyms.find(low); it != synonyms.end()) return it->second;
  throw LabelError("unknown label \"" + std::string(raw) + "\"");
}

namespace {

std::map<std::string, Label> out_of_taxonomy_synonyms() {
  // Raw SemEval files carry labels outside the task's classes; both tasks
  // fold them into Bad.
  return {
      {"dialogue", Label::Bad},
      {"dialog", Label::Bad},
      {"not english", Label::Bad},
      {"other", Label::Bad},
  };
}

}  // namespace

XmlDialect XmlDialect::fixture(TaskVariant) {
  XmlDialect d;
  d.label_synonyms = out_of_taxonomy_synonyms();
  return d;
}

XmlDialect XmlDialect::semeval2015() {
  XmlDialect d;
  d.question_tag = "Question";
  d.q_id_attr = "QID";
  d.q_category_attr = "QCATEGORY";
  d.q_author_attr = "QUSERID";
  d.q_subject_tag = "QSubject";
  d.q_body_tag = "QBody";
  d.comment_tag = "Comment";
  d.c_id_attr = "CID";
  d.c_author_attr = "CUSERID";
  d.c_gold_attr = "CGOLD";
  d.c_body_tag = "CBody";
  d.label_synonyms = out_of_taxonomy_synonyms();
  return d;
}

XmlDialect XmlDialect::semeval2016() {
  XmlDialect d;
  d.question_wrapper_tag = "Thread";
  d.question_tag = "RelQuestion";
  d.q_id_attr = "RELQ_ID";
  d.q_category_attr = "RELQ_CATEGORY";
  d.q_author_attr = "RELQ_USERID";
  d.q_subject_tag = "RelQSubject";
  d.q_body_tag = "RelQBody";
  d.comment_tag = "RelComment";
  d.c_id_attr = "RELC_ID";
  d.c_author_attr = "RELC_USERID";
  d.c_gold_attr = "RELC_RELEVANCE2RELQ";
  d.c_body_tag = "RelCText";
  d.label_synonyms = out_of_taxonomy_synonyms();
  return d;
}

namespace {

const std::string& require_attr(const XmlElement& element, const std::string& attr) {
  const std::string* value = element.attribute(attr);
  if (!value) {
    throw SchemaError("element <" + element.name + "> is missing required attribute " +
                      attr);
  }
  return *value;
}

std::string child_text(const XmlElement& element, const std::string& tag) {
  const XmlElement* c = element.child(tag);
  return c ? c->text : std::string();
}

Thread parse_one_thread(const XmlElement& question_el,
                        const std::vector<const XmlElement*>& comment_els,
                        const XmlDialect& dialect) {
  Thread thread;
  thread.question.id = require_attr(question_el, dialect.q_id_attr);
  thread.question.category = require_attr(question_el, dialect.q_category_attr);
  thread.question.author_id = require_attr(question_el, dialect.q_author_attr);
  thread.question.subject = child_text(question_el, dialect.q_subject_tag);
  thread.question.body = child_text(question_el, dialect.q_body_tag);
  if (thread.question.id.empty()) {
    throw SchemaError("element <" + question_el.name + "> has an empty " +
                      dialect.q_id_attr + " attribute");
  }

  int position = 0;
  for (const XmlElement* c : comment_els) {
    Answer answer;
    answer.id = require_attr(*c, dialect.c_id_attr);
    answer.author_id = require_attr(*c, dialect.c_author_attr);
    answer.body = child_text(*c, dialect.c_body_tag);
    if (const std::string* gold = c->attribute(dialect.c_gold_attr)) {
      // "?" marks withheld labels on raw test files.
      if (*gold != "?") answer.gold_label = normalize_label(*gold, dialect.label_synonyms);
    }
    answer.position = ++position;
    thread.answers.push_back(std::move(answer));
  }
  return thread;
}

}  // namespace

std::vector<Thread> parse_threads(std::string_view xml, TaskVariant variant) {
  return parse_threads(xml, variant, detect_dialect(xml, variant));
}

std::vector<Thread> parse_threads(std::string_view xml, TaskVariant /*variant*/,
                                  const XmlDialect& dialect) {
  const XmlElement root = xml_parse(xml);
  std::vector<Thread> threads;
  if (!dialect.question_wrapper_tag.empty()) {
    for (const XmlElement& wrapper : root.children) {
      if (wrapper.name != dialect.question_wrapper_tag) continue;
      const XmlElement* question_el = wrapper.child(dialect.question_tag);
      if (!question_el) {
        throw SchemaError("element <" + wrapper.name + "> is missing child <" +
                          dialect.question_tag + ">");
      }
      std::vector<const XmlElement*> comments;
      for (const XmlElement& c : wrapper.children) {
        if (c.name == dialect.comment_tag) comments.push_back(&c);
      }
      threads.push_back(parse_one_thread(*question_el, comments, dialect));
    }
  } else {
    for (const XmlElement& question_el : root.children) {
      if (question_el.name != dialect.question_tag) continue;
      std::vector<const XmlElement*> comments;
      for (const XmlElement& c : question_el.children) {
        if (c.name == dialect.comment_tag) comments.push_back(&c);
      }
      threads.push_back(parse_one_thread(question_el, comments, dialect));
    }
  }
  return threads;
}

XmlDialect detect_dialect(std::string_view xml, TaskVariant variant) {
  XmlElement root;
  try {
    root = xml_parse(xml);
  } catch (const ParseError&) {
    return XmlDialect::fixture(variant);  // parse_threads will re-raise
  }
  for (const XmlElement& child : root.children) {
    if (child.name == "Thread" || child.name == "OrgQuestion") {
      return XmlDialect::semeval2016();
    }
    if (child.name == "Question") {
      if (child.attribute("QCATEGORY")) return XmlDialect::semeval2015();
      return XmlDialect::fixture(variant);
    }
  }
  return XmlDialect::fixture(variant);
}

CorpusStats compute_stats(const std::vector<Thread>& threads) {
  CorpusStats stats;
  for (const Thread& thread : threads) {
    for (const Answer& answer : thread.answers) {
      if (!answer.gold_label) {
        throw LabelError("answer " + answer.id + " has no gold label");
      }
      stats.authors[answer.author_id].add(*answer.gold_label);
      stats.categories[thread.question.category].add(*answer.gold_label);
    }
  }
  return stats;
}

std::string thread_to_json(const Thread& thread) {
  json answers = json::array();
  for (const Answer& a : thread.answers) {
    json ja{{"id", a.id},
            {"author", a.author_id},
            {"body", a.body},
            {"position", a.position}};
    ja["label"] = a.gold_label ? json(to_string(*a.gold_label)) : json(nullptr);
    answers.push_back(std::move(ja));
  }
  json jt{{"id", thread.question.id},
          {"category", thread.question.category},
          {"author", thread.question.author_id},
          {"subject", thread.question.subject},
          {"body", thread.question.body},
          {"answers", std::move(answers)}};
  return jt.dump();
}

Thread thread_from_json(std::string_view json_line) {
  json jt;
  try {
    jt = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("thread json: ") + e.what(), e.byte);
  }
  Thread thread;
  try {
    thread.question.id = jt.at("id").get<std::string>();
    thread.question.category = jt.at("category").get<std::string>();
    thread.question.author_id = jt.at("author").get<std::string>();
    thread.question.subject = jt.at("subject").get<std::string>();
    thread.question.body = jt.at("body").get<std::string>();
    for (const json& ja : jt.at("answers")) {
      Answer a;
      a.id = ja.at("id").get<std::string>();
      a.author_id = ja.at("author").get<std::string>();
      a.body = ja.at("body").get<std::string>();
      a.position = ja.at("position").get<int>();
      if (!ja.at("label").is_null()) {
        a.gold_label = label_from_name(ja.at("label").get<std::string>());
      }
      thread.answers.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("thread json: ") + e.what());
  }
  for (std::size_t i = 0; i < thread.answers.size(); ++i) {
    if (thread.answers[i].position != static_cast<int>(i) + 1) {
      throw SchemaError("thread " + thread.question.id +
                        ": answer positions are not contiguous from 1");
    }
  }
  return thread;
}

void write_threads_jsonl(std::ostream& out, const std::vector<Thread>& threads) {
  for (const Thread& t : threads) out << thread_to_json(t) << "\n";
}

std::vector<Thread> read_threads_jsonl(std::istream& in) {
  std::vector<Thread> threads;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    threads.push_back(thread_from_json(line));
  }
  return threads;
}

std::size_t count_pairs(const std::vector<Thread>& threads) {
  std::size_t n = 0;
  for (const Thread& t : threads) n += t.answers.size();
  return n;
}

std::string question_text(const Question& question) {
  if (question.subject.empty()) return question.body;
  if (question.body.empty()) return question.subject;
  return question.subject + " " + question.body;
}

}  // namespace dffn
