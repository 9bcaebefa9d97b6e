#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace opencost::xml {

// Minimal XML document model: an element with attributes, character data,
// and child elements. Mixed content is not modeled; character data between
// child elements is concatenated into `text` (whitespace-only runs are
// dropped). Enough for the cost schema and OAI-PMH envelopes.
struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  std::size_t offset = 0;  // byte offset of '<' in the source, 0 when built

  const std::string* attr(std::string_view name) const;
  const Element* child(std::string_view local_name) const;
  std::vector<const Element*> children_named(std::string_view local_name) const;
  // name with any namespace prefix stripped
  std::string_view local_name() const;
};

// Parses one document (prolog, comments, CDATA, the five predefined
// entities plus numeric character references). Throws Error{Malformed}
// with the byte offset of the problem.
Element parse(std::string_view input);

// Canonical single-line serialization, UTF-8, attributes in stored order.
std::string serialize(const Element& root, bool with_declaration = true);

std::string escape_text(std::string_view s);
std::string escape_attr(std::string_view s);
bool valid_name(std::string_view s);

}  // namespace opencost::xml
