#include "dffn/xml.h"

#include <cctype>

#include "dffn/errors.h"

namespace dffn {

const std::string* XmlElement::attribute(std::string_view attr_name) const {
  for (const auto& a : attributes) {
    if (a.name == attr_name) return &a.value;
  }
  return nullptr;
}

const XmlElement* XmlElement::child(std::string_view child_name) const {
  for (const auto& c : children) {
    if (c.name == child_name) return &c;
  }
  return nullptr;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view doc) : doc_(doc) {}

  XmlElement parse_document() {
    skip_bom();
    skip_misc();
    if (eof() || peek() != '<') fail("expected root element");
    XmlElement root = parse_element();
    skip_misc();
    if (!eof()) fail("trailing content after root element");
    return root;
  }

 private:
  bool eof() const { return pos_ >= doc_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < doc_.size() ? doc_[pos_ + ahead] : '\0';
  }
  bool starts_with(std::string_view s) const {
    return doc_.compare(pos_, s.size(), s) == 0;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("xml: " + what, pos_);
  }

  void skip_bom() {
    if (starts_with("\xEF\xBB\xBF")) pos_ += 3;
  }

  void skip_whitespace() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  // Whitespace, prolog, comments, doctype, processing instructions.
  void skip_misc() {
    for (;;) {
      skip_whitespace();
      if (starts_with("<?")) {
        skip_until("?>");
      } else if (starts_with("<!--")) {
        skip_until("-->");
      } else if (starts_with("<!")) {
        skip_until(">");
      } else {
        return;
      }
    }
  }

  void skip_until(std::string_view terminator) {
    const std::size_t found = doc_.find(terminator, pos_);
    if (found == std::string_view::npos) fail("unterminated markup");
    pos_ = found + terminator.size();
  }

  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           c == '.' || c == ':';
  }

  std::string parse_name() {
    const std::size_t start = pos_;
    while (!eof() && is_name_char(peek())) ++pos_;
    if (pos_ == start) fail("expected a name");
    return std::string(doc_.substr(start, pos_ - start));
  }

  void append_entity(std::string& out) {
    const std::size_t start = pos_;
    ++pos_;  // consume '&'
    const std::size_t end = doc_.find(';', pos_);
    if (end == std::string_view::npos || end - pos_ > 10) {
      pos_ = start;
      fail("unterminated entity reference");
    }
    std::string_view name = doc_.substr(pos_, end - pos_);
    if (name == "amp") {
      out += '&';
    } else if (name == "lt") {
      out += '<';
    } else if (name == "gt") {
      out += '>';
    } else if (name == "quot") {
      out += '"';
    } else if (name == "apos") {
      out += '\'';
    } else if (!name.empty() && name[0] == '#') {
      long code = 0;
      try {
        code = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                   ? std::stol(std::string(name.substr(2)), nullptr, 16)
                   : std::stol(std::string(name.substr(1)));
      } catch (...) {
        pos_ = start;
        fail("bad character reference");
      }
      append_utf8(out, code);
    } else {
      pos_ = start;
      fail("unknown entity &" + std::string(name) + ";");
    }
    pos_ = end + 1;
  }

  static void append_utf8(std::string& out, long code) {
    if (code < 0x80) {
      out += static_cast<char>(code);
    } else if (code < 0x800) {
      out += static_cast<char>(0xC0 | (code >> 6));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else if (code < 0x10000) {
      out += static_cast<char>(0xE0 | (code >> 12));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (code >> 18));
      out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    }
  }

  std::string parse_attribute_value() {
    const char quote = peek();
    if (quote != '"' && quote != '\'') fail("expected quoted attribute value");
    ++pos_;
    std::string value;
    while (!eof() && peek() != quote) {
      if (peek() == '&') {
        append_entity(value);
      } else if (peek() == '<') {
        fail("'<' inside attribute value");
      } else {
        value += doc_[pos_++];
      }
    }
    if (eof()) fail("unterminated attribute value");
    ++pos_;  // closing quote
    return value;
  }

  XmlElement parse_element() {
    ++pos_;  // consume '<'
    XmlElement element;
    element.name = parse_name();
    for (;;) {
      skip_whitespace();
      if (eof()) fail("unterminated start tag");
      if (starts_with("/>")) {
        pos_ += 2;
        return element;
      }
      if (peek() == '>') {
        ++pos_;
        parse_content(element);
        return element;
      }
      XmlAttr attr;
      attr.name = parse_name();
      skip_whitespace();
      if (peek() != '=') fail("expected '=' after attribute name");
      ++pos_;
      skip_whitespace();
      attr.value = parse_attribute_value();
      element.attributes.push_back(std::move(attr));
    }
  }

  void parse_content(XmlElement& element) {
    for (;;) {
      if (eof()) fail("unterminated element <" + element.name + ">");
      if (peek() == '<') {
        if (starts_with("</")) {
          pos_ += 2;
          std::string name = parse_name();
          if (name != element.name) {
            fail("mismatched close tag </" + name + "> for <" + element.name + ">");
          }
          skip_whitespace();
          if (peek() != '>') fail("malformed close tag");
          ++pos_;
          return;
        }
        if (starts_with("<!--")) {
          skip_until("-->");
        } else if (starts_with("<![CDATA[")) {
          pos_ += 9;
          const std::size_t end = doc_.find("]]>", pos_);
          if (end == std::string_view::npos) fail("unterminated CDATA section");
          element.text.append(doc_.substr(pos_, end - pos_));
          pos_ = end + 3;
        } else if (starts_with("<?")) {
          skip_until("?>");
        } else {
          element.children.push_back(parse_element());
        }
      } else if (peek() == '&') {
        append_entity(element.text);
      } else {
        element.text += doc_[pos_++];
      }
    }
  }

  std::string_view doc_;
  std::size_t pos_ = 0;
};

}  // namespace

XmlElement xml_parse(std::string_view document) {
  return Parser(document).parse_document();
}

}  // namespace dffn
