#include "opencost/allocation.hpp"

#include <algorithm>
#include <set>

#include "opencost/errors.hpp"

namespace opencost {

namespace {

bool record_links(const PublicationCostRecord& rec, const std::string& contract_id) {
  return std::find(rec.contract_links.begin(), rec.contract_links.end(), contract_id) !=
         rec.contract_links.end();
}

}  // namespace

ContractLinkIndex build_link_index(const Corpus& corpus) {
  ContractLinkIndex index;
  // sort keys: (institution, record_id, source_id)
  struct Member {
    std::string institution;
    RecordKey key;
  };
  std::map<GroupRef, std::vector<Member>> staged;

  for (const auto& [key, rec] : corpus.records()) {
    std::set<std::string> seen_links;
    for (const auto& link : rec.contract_links) {
      if (!seen_links.insert(link).second) continue;  // duplicate link, count once
      const Contract* con = corpus.find_contract(link);
      if (!con) {
        throw Error(ErrorCode::dangling_link,
                    "record " + key.str() + " links unknown contract '" + link + "'")
            .with_field(key.str());
      }
      bool matched = false;
      if (con->has_participant(rec.institution)) {
        for (const auto& group : con->cost_groups) {
          if (group.contains(rec.publication_date)) {
            staged[{con->contract_id, group.group_id}].push_back({rec.institution, key});
            matched = true;
          }
        }
      }
      if (!matched) index.unmatched_links.emplace_back(key, link);
    }
  }

  for (auto& [ref, members] : staged) {
    std::sort(members.begin(), members.end(), [](const Member& a, const Member& b) {
      if (a.institution != b.institution) return a.institution < b.institution;
      if (a.key.record_id != b.key.record_id) return a.key.record_id < b.key.record_id;
      return a.key.source_id < b.key.source_id;
    });
    auto& out = index.members[ref];
    out.reserve(members.size());
    for (auto& m : members) out.push_back(std::move(m.key));
  }
  std::sort(index.unmatched_links.begin(), index.unmatched_links.end());
  return index;
}

Money AllocationResult::share_for(const RecordKey& key) const {
  auto it = share_totals.find(key);
  return it == share_totals.end() ? Money::eur_cents(0) : it->second;
}

AllocationResult allocate(const Contract& contract, const ContractLinkIndex& index,
                          const RateTable& rates) {
  AllocationResult result;
  for (const auto& group : contract.cost_groups) {
    GroupRef ref{contract.contract_id, group.group_id};
    GroupAllocation alloc;
    alloc.total_eur = rates.to_eur(group.total, group.period_from);
    alloc.unallocated = Money::eur_cents(0);

    auto members_it = index.members.find(ref);
    std::size_t n = members_it == index.members.end() ? 0 : members_it->second.size();
    if (n == 0) {
      alloc.unallocated = alloc.total_eur;
    } else {
      std::int64_t total_raw = alloc.total_eur.amount().raw();
      std::int64_t total_cents = total_raw / 100;
      std::int64_t dust_raw = total_raw % 100;  // only for sub-cent EUR totals
      std::int64_t quotient = total_cents / static_cast<std::int64_t>(n);
      std::int64_t remainder = total_cents % static_cast<std::int64_t>(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::int64_t cents = quotient + (static_cast<std::int64_t>(i) < remainder ? 1 : 0);
        const RecordKey& key = members_it->second[i];
        Money share = Money::eur_cents(cents);
        alloc.shares.emplace(key, share);
        auto [it, inserted] = result.share_totals.emplace(key, share);
        if (!inserted) it->second = it->second + share;
      }
      if (dust_raw != 0) {
        alloc.unallocated = Money(Decimal4::from_raw(dust_raw), "EUR");
      }
    }
    result.groups.emplace(std::move(ref), std::move(alloc));
  }
  return result;
}

AllocationResult allocate_corpus(const Corpus& corpus, const ContractLinkIndex& index,
                                 const RateTable& rates) {
  AllocationResult result;
  for (const auto& [id, contract] : corpus.contracts()) {
    AllocationResult one = allocate(contract, index, rates);
    for (auto& [ref, alloc] : one.groups) result.groups.emplace(ref, std::move(alloc));
    for (auto& [key, share] : one.share_totals) {
      auto [it, inserted] = result.share_totals.emplace(key, share);
      if (!inserted) it->second = it->second + share;
    }
  }
  return result;
}

Money effective_cost(const RecordKey& key, const PublicationCostRecord& record,
                     const AllocationResult& allocation, const RateTable& rates,
                     bool include_vat) {
  Money total = Money::eur_cents(0);
  for (const auto& part : record.cost_parts) {
    total = total + rates.to_eur(part.amount, part.invoice_date);
    if (include_vat && part.vat) {
      total = total + rates.to_eur(*part.vat, part.invoice_date);
    }
  }
  return total + allocation.share_for(key);
}

ContractEfficiency contract_efficiency(const Contract& contract,
                                       const AllocationResult& allocation) {
  ContractEfficiency out;
  out.contract_id = contract.contract_id;
  out.total_eur = Money::eur_cents(0);
  std::set<RecordKey> distinct;
  for (const auto& group : contract.cost_groups) {
    auto it = allocation.groups.find({contract.contract_id, group.group_id});
    if (it == allocation.groups.end()) continue;
    out.total_eur = out.total_eur + it->second.total_eur;
    for (const auto& [key, share] : it->second.shares) distinct.insert(key);
  }
  out.n_articles = distinct.size();
  if (out.n_articles > 0) {
    std::int64_t cents = Decimal4::div_round_half_even(
        out.total_eur.amount().raw(), static_cast<std::int64_t>(out.n_articles) * 100);
    out.eur_per_article = Money::eur_cents(cents);
  }
  return out;
}

}  // namespace opencost
