// SPDX-License-Identifier: Apache-2.0
#include "tokenizer.h"

#include <cctype>

namespace text {

std::vector<Token> Tokenize(const std::string& input) {
  TRACE_EVENT("text", "Tokenize");
  VLOG(2) << "tokenizing " << input.size() << " bytes";
  std::vector<Token> out;
  out.reserve(input.size() / 2);
  size_t i = 0;
  while (i < input.size()) {
    char c = input[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      i++;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = i;
      while (i < input.size() && std::isdigit(static_cast<unsigned char>(input[i]))) {
        i++;
      }
      out.push_back({TokenKind::kNumber, input.substr(start, i - start)});
      VLOG(3) << "number " << out.back().text;
      continue;
    }
    if (c == '(' || c == ')') {
      out.push_back({TokenKind::kParen, std::string(1, c)});
      i++;
      continue;
    }
    if (c == '+' || c == '-' || c == '*' || c == '/') {
      out.push_back({TokenKind::kOperator, std::string(1, c)});
      i++;
      continue;
    }
    LOG(ERROR) << "unexpected character at " << i;
    metrics::Counter("text/tokenize_errors")->Increment();
    return {};
  }
  metrics::Counter("text/tokens")->IncrementBy(out.size());
  return out;
}

int Precedence(const Token& t) {
  DCHECK(t.kind == TokenKind::kOperator);
  if (t.text == "*" || t.text == "/") return 2;
  if (t.text == "+" || t.text == "-") return 1;
  return 0;
}

}  // namespace text
