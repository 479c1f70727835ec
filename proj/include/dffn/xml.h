#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dffn {

struct XmlAttr {
  std::string name;
  std::string value;
};

struct XmlElement {
  std::string name;
  std::vector<XmlAttr> attributes;
  std::vector<XmlElement> children;
  std::string text;  // character data directly inside this element

  const std::string* attribute(std::string_view attr_name) const;
  const XmlElement* child(std::string_view child_name) const;
};

// Parses a standalone XML document into its root element. Supports the
// subset the corpus files use: prolog, comments, CDATA, attributes quoted
// with ' or ", and the five named entities plus numeric character
// references. Throws ParseError carrying the byte offset of the failure.
XmlElement xml_parse(std::string_view document);

}  // namespace dffn
