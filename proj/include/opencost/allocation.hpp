#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opencost/exchange.hpp"
#include "opencost/model.hpp"

namespace opencost {

struct GroupRef {
  std::string contract_id;
  std::string group_id;
  auto operator<=>(const GroupRef&) const = default;
  std::string str() const { return contract_id + "#" + group_id; }
};

// Which records belong to which contract cost group. Membership needs all
// three: an explicit contract link, publication_date inside the group
// period, and the record's institution among the contract participants.
// Member lists are sorted by (institution, record_id, source_id) — the
// deterministic order remainder cents are handed out in.
struct ContractLinkIndex {
  std::map<GroupRef, std::vector<RecordKey>> members;
  // links that resolve to a contract but match none of its groups
  std::vector<std::pair<RecordKey, std::string>> unmatched_links;
};

// Pre: no dangling links (throws DanglingLink otherwise).
ContractLinkIndex build_link_index(const Corpus& corpus);

struct GroupAllocation {
  Money total_eur;                    // to_eur(group total) at period_from
  std::map<RecordKey, Money> shares;  // EUR per member record
  Money unallocated;                  // total when no members, plus sub-cent dust

  bool operator==(const GroupAllocation&) const = default;
};

struct AllocationResult {
  std::map<GroupRef, GroupAllocation> groups;
  std::map<RecordKey, Money> share_totals;  // per-record sum over all groups

  Money share_for(const RecordKey& key) const;
  bool operator==(const AllocationResult&) const = default;
};

// Equal split per cost group: quotient floored to cents, the r remaining
// cents go one each to the first r records in index order.
AllocationResult allocate(const Contract& contract, const ContractLinkIndex& index,
                          const RateTable& rates);
AllocationResult allocate_corpus(const Corpus& corpus, const ContractLinkIndex& index,
                                 const RateTable& rates);

// Direct costs (converted at invoice_date) plus all contract shares.
Money effective_cost(const RecordKey& key, const PublicationCostRecord& record,
                     const AllocationResult& allocation, const RateTable& rates,
                     bool include_vat = false);

struct ContractEfficiency {
  std::string contract_id;
  Money total_eur;
  std::size_t n_articles = 0;
  std::optional<Money> eur_per_article;  // unset when n_articles == 0
};

ContractEfficiency contract_efficiency(const Contract& contract,
                                       const AllocationResult& allocation);

}  // namespace opencost
