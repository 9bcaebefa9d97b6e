#include "opencost/xml.hpp"

#include <cctype>

#include "opencost/errors.hpp"

namespace opencost::xml {

namespace {

[[noreturn]] void fail(std::string message, std::size_t pos) {
  throw Error(ErrorCode::malformed, std::move(message), pos);
}

bool name_start_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
         c == '-' || c == '.';
}

class Parser {
 public:
  explicit Parser(std::string_view input) : in_(input) {}

  Element parse_document() {
    skip_prolog_and_misc();
    Element root = parse_element();
    skip_misc();
    if (pos_ != in_.size()) fail("content after document element", pos_);
    return root;
  }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;

  bool eof() const { return pos_ >= in_.size(); }
  char peek() const { return in_[pos_]; }
  bool starts_with(std::string_view s) const { return in_.substr(pos_, s.size()) == s; }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  void expect(char c) {
    if (eof() || peek() != c) fail(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  void skip_until(std::string_view terminator, const char* what) {
    std::size_t found = in_.find(terminator, pos_);
    if (found == std::string_view::npos) fail(std::string("unterminated ") + what, pos_);
    pos_ = found + terminator.size();
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        pos_ += 4;
        skip_until("-->", "comment");
      } else if (starts_with("<?")) {
        pos_ += 2;
        skip_until("?>", "processing instruction");
      } else {
        return;
      }
    }
  }

  void skip_prolog_and_misc() {
    skip_ws();
    if (starts_with("<?xml")) {
      pos_ += 5;
      skip_until("?>", "XML declaration");
    }
    skip_misc();
    if (starts_with("<!DOCTYPE")) {
      // internal subsets are not supported; skip to the closing '>'
      skip_until(">", "DOCTYPE");
      skip_misc();
    }
  }

  std::string parse_name() {
    std::size_t start = pos_;
    if (eof() || !name_start_char(peek())) fail("expected a name", pos_);
    ++pos_;
    while (!eof() && name_char(peek())) ++pos_;
    return std::string(in_.substr(start, pos_ - start));
  }

  std::string decode_entities(std::string_view raw, std::size_t at,
                              bool* saw_entity = nullptr) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size();) {
      if (raw[i] != '&') {
        out += raw[i++];
        continue;
      }
      if (saw_entity) *saw_entity = true;
      std::size_t semi = raw.find(';', i);
      if (semi == std::string_view::npos) fail("unterminated entity reference", at + i);
      std::string_view ent = raw.substr(i + 1, semi - i - 1);
      if (ent == "amp") out += '&';
      else if (ent == "lt") out += '<';
      else if (ent == "gt") out += '>';
      else if (ent == "quot") out += '"';
      else if (ent == "apos") out += '\'';
      else if (!ent.empty() && ent[0] == '#') {
        long code = 0;
        bool ok = ent.size() > 1;
        if (ent.size() > 2 && (ent[1] == 'x' || ent[1] == 'X')) {
          for (std::size_t k = 2; k < ent.size() && ok; ++k) {
            char c = ent[k];
            int v = c >= '0' && c <= '9'   ? c - '0'
                    : c >= 'a' && c <= 'f' ? c - 'a' + 10
                    : c >= 'A' && c <= 'F' ? c - 'A' + 10
                                           : -1;
            if (v < 0) ok = false;
            else code = code * 16 + v;
          }
        } else {
          for (std::size_t k = 1; k < ent.size() && ok; ++k) {
            if (!std::isdigit(static_cast<unsigned char>(ent[k]))) ok = false;
            else code = code * 10 + (ent[k] - '0');
          }
        }
        if (!ok || code <= 0 || code > 0x10FFFF) fail("bad character reference", at + i);
        // encode as UTF-8
        if (code < 0x80) out += static_cast<char>(code);
        else if (code < 0x800) {
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
      } else {
        fail("unknown entity '&" + std::string(ent) + ";'", at + i);
      }
      i = semi + 1;
    }
    return out;
  }

  Element parse_element() {
    Element el;
    el.offset = pos_;
    expect('<');
    el.name = parse_name();
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated start tag", el.offset);
      if (peek() == '/') {
        ++pos_;
        expect('>');
        return el;  // self-closing
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      std::size_t attr_at = pos_;
      std::string attr_name = parse_name();
      skip_ws();
      expect('=');
      skip_ws();
      if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute", pos_);
      char quote = peek();
      ++pos_;
      std::size_t val_start = pos_;
      std::size_t end = in_.find(quote, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value", attr_at);
      std::string_view raw = in_.substr(val_start, end - val_start);
      if (raw.find('<') != std::string_view::npos) fail("'<' in attribute value", val_start);
      el.attributes.emplace_back(std::move(attr_name), decode_entities(raw, val_start));
      pos_ = end + 1;
    }
    // content
    std::string text;
    bool text_is_deliberate = false;  // entities/CDATA mark intentional data
    for (;;) {
      if (eof()) fail("unterminated element <" + el.name + ">", el.offset);
      if (starts_with("<!--")) {
        pos_ += 4;
        skip_until("-->", "comment");
        continue;
      }
      if (starts_with("<![CDATA[")) {
        std::size_t cd_start = pos_ + 9;
        std::size_t end = in_.find("]]>", cd_start);
        if (end == std::string_view::npos) fail("unterminated CDATA", pos_);
        text.append(in_.substr(cd_start, end - cd_start));
        text_is_deliberate = true;
        pos_ = end + 3;
        continue;
      }
      if (starts_with("</")) {
        std::size_t close_at = pos_;
        pos_ += 2;
        std::string close_name = parse_name();
        if (close_name != el.name) {
          fail("mismatched close tag </" + close_name + "> for <" + el.name + ">", close_at);
        }
        skip_ws();
        expect('>');
        break;
      }
      if (peek() == '<') {
        if (starts_with("<?")) {
          pos_ += 2;
          skip_until("?>", "processing instruction");
          continue;
        }
        el.children.push_back(parse_element());
        continue;
      }
      std::size_t run_start = pos_;
      while (!eof() && peek() != '<') ++pos_;
      std::string_view raw = in_.substr(run_start, pos_ - run_start);
      text += decode_entities(raw, run_start, &text_is_deliberate);
    }
    // drop whitespace-only character data (indentation between children);
    // whitespace written via character references survives
    bool only_ws = !text_is_deliberate;
    for (char c : text) {
      if (!std::isspace(static_cast<unsigned char>(c))) {
        only_ws = false;
        break;
      }
    }
    if (!only_ws) el.text = std::move(text);
    return el;
  }
};

void serialize_into(const Element& el, std::string& out) {
  out += '<';
  out += el.name;
  for (const auto& [name, value] : el.attributes) {
    out += ' ';
    out += name;
    out += "=\"";
    out += escape_attr(value);
    out += '"';
  }
  if (el.children.empty() && el.text.empty()) {
    out += "/>";
    return;
  }
  out += '>';
  out += escape_text(el.text);
  for (const auto& child : el.children) serialize_into(child, out);
  out += "</";
  out += el.name;
  out += '>';
}

}  // namespace

const std::string* Element::attr(std::string_view name) const {
  for (const auto& [n, v] : attributes) {
    if (n == name) return &v;
  }
  return nullptr;
}

std::string_view Element::local_name() const {
  std::size_t colon = name.rfind(':');
  return colon == std::string::npos ? std::string_view(name)
                                    : std::string_view(name).substr(colon + 1);
}

const Element* Element::child(std::string_view local) const {
  for (const auto& c : children) {
    if (c.local_name() == local) return &c;
  }
  return nullptr;
}

std::vector<const Element*> Element::children_named(std::string_view local) const {
  std::vector<const Element*> out;
  for (const auto& c : children) {
    if (c.local_name() == local) out.push_back(&c);
  }
  return out;
}

Element parse(std::string_view input) { return Parser(input).parse_document(); }

std::string serialize(const Element& root, bool with_declaration) {
  std::string out;
  if (with_declaration) out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>";
  serialize_into(root, out);
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    bool edge = i == 0 || i + 1 == s.size();
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '\n': out += "&#10;"; break;
      case '\t': out += "&#9;"; break;
      case '\r': out += "&#13;"; break;
      case ' ':
        // escape edge spaces so the value is not mistaken for indentation
        if (edge) out += "&#32;";
        else out += c;
        break;
      default:
        if (edge && std::isspace(static_cast<unsigned char>(c))) {
          out += "&#" + std::to_string(static_cast<unsigned char>(c)) + ";";
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\t': out += "&#9;"; break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

bool valid_name(std::string_view s) {
  if (s.empty() || !name_start_char(s[0])) return false;
  for (char c : s) {
    if (!name_char(c)) return false;
  }
  return true;
}

}  // namespace opencost::xml
