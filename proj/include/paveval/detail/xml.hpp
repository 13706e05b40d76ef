#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "paveval/errors.hpp"

namespace paveval::xml {

// Element-tree node. Attributes are parsed but not stored; the annotation
// formats handled here never use them.
struct Element {
    std::string name;
    std::string text;  // concatenated character data, trimmed
    std::vector<Element> children;
    int line = 0;

    const Element* child(std::string_view child_name) const {
        for (const auto& c : children) {
            if (c.name == child_name) return &c;
        }
        return nullptr;
    }

    const Element& require(std::string_view child_name) const {
        const Element* c = child(child_name);
        if (!c) {
            throw ParseError("line " + std::to_string(line) + ": <" + name +
                             "> is missing required child <" +
                             std::string(child_name) + ">");
        }
        return *c;
    }
};

namespace detail {

class Cursor {
public:
    explicit Cursor(std::string_view text) : text_(text) {}

    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    int line() const { return line_; }

    char advance() {
        const char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    bool consume(std::string_view token) {
        if (text_.substr(pos_, token.size()) != token) return false;
        for (size_t i = 0; i < token.size(); ++i) advance();
        return true;
    }

    bool starts_with(std::string_view token) const {
        return text_.substr(pos_, token.size()) == token;
    }

    void skip_until(std::string_view token) {
        while (!eof() && !starts_with(token)) advance();
        if (eof()) {
            throw ParseError("line " + std::to_string(line_) +
                             ": unterminated construct, expected '" +
                             std::string(token) + "'");
        }
        consume(token);
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r' ||
                          peek() == '\n')) {
            advance();
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError("line " + std::to_string(line_) + ": " + what);
    }

private:
    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
};

inline bool is_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.' ||
           c == ':';
}

inline void append_entity(Cursor& cur, std::string& out) {
    std::string name;
    while (!cur.eof() && cur.peek() != ';') name.push_back(cur.advance());
    if (cur.eof()) cur.fail("unterminated entity reference");
    cur.advance();  // ';'
    if (name == "lt") {
        out.push_back('<');
    } else if (name == "gt") {
        out.push_back('>');
    } else if (name == "amp") {
        out.push_back('&');
    } else if (name == "quot") {
        out.push_back('"');
    } else if (name == "apos") {
        out.push_back('\'');
    } else if (!name.empty() && name[0] == '#') {
        int code = 0;
        try {
            code = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                       ? std::stoi(name.substr(2), nullptr, 16)
                       : std::stoi(name.substr(1));
        } catch (const std::exception&) {
            cur.fail("bad character reference '&" + name + ";'");
        }
        if (code < 0 || code > 127) cur.fail("non-ASCII character reference");
        out.push_back(static_cast<char>(code));
    } else {
        cur.fail("unknown entity '&" + name + ";'");
    }
}

inline void skip_misc(Cursor& cur) {
    for (;;) {
        cur.skip_ws();
        if (cur.starts_with("<?")) {
            cur.skip_until("?>");
        } else if (cur.starts_with("<!--")) {
            cur.skip_until("-->");
        } else if (cur.starts_with("<!")) {
            cur.skip_until(">");
        } else {
            return;
        }
    }
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline Element parse_element(Cursor& cur) {
    if (cur.eof() || cur.peek() != '<') cur.fail("expected element start '<'");
    Element el;
    el.line = cur.line();
    cur.advance();  // '<'
    while (!cur.eof() && is_name_char(cur.peek())) el.name.push_back(cur.advance());
    if (el.name.empty()) cur.fail("element has empty name");

    // Attributes: scan to '>' or '/>', validating quote pairing only.
    for (;;) {
        cur.skip_ws();
        if (cur.eof()) cur.fail("unterminated start tag <" + el.name + ">");
        if (cur.consume("/>")) return el;
        if (cur.consume(">")) break;
        while (!cur.eof() && is_name_char(cur.peek())) cur.advance();
        cur.skip_ws();
        if (!cur.consume("=")) cur.fail("malformed attribute in <" + el.name + ">");
        cur.skip_ws();
        if (cur.eof()) cur.fail("unterminated attribute value");
        const char quote = cur.advance();
        if (quote != '"' && quote != '\'') cur.fail("attribute value must be quoted");
        while (!cur.eof() && cur.peek() != quote) cur.advance();
        if (cur.eof()) cur.fail("unterminated attribute value");
        cur.advance();
    }

    // Content: text, child elements, comments, CDATA.
    std::string text;
    for (;;) {
        if (cur.eof()) cur.fail("missing closing tag for <" + el.name + ">");
        if (cur.starts_with("<!--")) {
            cur.skip_until("-->");
        } else if (cur.starts_with("<![CDATA[")) {
            cur.consume("<![CDATA[");
            while (!cur.eof() && !cur.starts_with("]]>")) text.push_back(cur.advance());
            cur.skip_until("]]>");
        } else if (cur.starts_with("</")) {
            cur.consume("</");
            std::string closing;
            while (!cur.eof() && is_name_char(cur.peek())) closing.push_back(cur.advance());
            cur.skip_ws();
            if (!cur.consume(">")) cur.fail("malformed closing tag </" + closing + ">");
            if (closing != el.name) {
                cur.fail("mismatched closing tag: expected </" + el.name +
                         ">, found </" + closing + ">");
            }
            el.text = trim(std::move(text));
            return el;
        } else if (cur.peek() == '<') {
            el.children.push_back(parse_element(cur));
        } else if (cur.peek() == '&') {
            cur.advance();
            append_entity(cur, text);
        } else {
            text.push_back(cur.advance());
        }
    }
}

}  // namespace detail

// Parses a document and returns its root element. Throws ParseError with a
// line number on malformed input.
inline Element parse(std::string_view document) {
    detail::Cursor cur(document);
    detail::skip_misc(cur);
    if (cur.eof()) cur.fail("document has no root element");
    Element root = detail::parse_element(cur);
    detail::skip_misc(cur);
    if (!cur.eof()) cur.fail("trailing content after root element");
    return root;
}

inline std::string escape(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace paveval::xml
