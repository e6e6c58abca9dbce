#ifndef REBUTRANK_PORTER_HPP
#define REBUTRANK_PORTER_HPP

#include <string>
#include <string_view>

namespace rebutrank {

// Porter stemming algorithm (1980), matching the classic reference
// implementation including its published errata (bli->ble, logi->log).
// Words of length <= 2 and words containing non-ASCII-lowercase characters
// are returned unchanged.
std::string porter_stem(std::string_view word);

} // namespace rebutrank

#endif
