#pragma once

#include <optional>
#include <vector>

namespace reservelab {

struct BidProfile {
  std::vector<double> bids;
};

struct AuctionOutcome {
  bool allocated = false;
  std::optional<int> winner;
  std::vector<double> payments;  // at most one nonzero entry
  double clearing_price = 0.0;
};

// Second-price auction with an anonymous reserve. Allocation uses the weak
// inequality b >= r; bid ties break toward the lowest buyer index so replays
// are deterministic. Bids outside [0, v_max] are rejected.
AuctionOutcome run_second_price(const BidProfile& bids, double reserve, double v_max);

// Single-buyer posted-price round: the isolated buyer wins iff bid >= reserve
// and pays the reserve. The outcome indexes the lone participant as buyer 0.
AuctionOutcome run_isolation(double bid, double reserve);

double realized_revenue(const AuctionOutcome& outcome);

}  // namespace reservelab
