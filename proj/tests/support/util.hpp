#pragma once

#include <string>
#include <vector>

#include "ame/symbols.hpp"

namespace test_util {

/// First function of an analyzed source snippet.
inline ame::AnalyzedFunction analyze_first(const std::string& src) {
  auto funcs = ame::analyze_source(src);
  if (funcs.empty()) throw std::runtime_error("no function in snippet");
  return std::move(funcs.front());
}

/// Named function of an analyzed source snippet.
inline ame::AnalyzedFunction analyze_named(const std::string& src, const std::string& name) {
  for (auto& af : ame::analyze_source(src))
    if (af.ir.name == name) return std::move(af);
  throw std::runtime_error("function not found: " + name);
}

/// The Fig.-5-style vulnerable withdraw function used across tests.
inline const char* kWithdrawSource = R"(
contract Victim {
    mapping(address => uint256) public userBalance;

    function withdraw(uint amount) public {
        require(userBalance[msg.sender] >= amount);
        msg.sender.call.value(amount)();
        userBalance[msg.sender] -= amount;
    }
}
)";

}  // namespace test_util
