#include "reservelab/auction.hpp"

#include <stdexcept>

namespace reservelab {

AuctionOutcome run_second_price(const BidProfile& profile, double reserve, double v_max) {
  const auto& bids = profile.bids;
  if (bids.size() < 2) throw std::invalid_argument("auction: needs at least 2 bids");
  if (!(reserve >= 0.0 && reserve <= v_max))
    throw std::invalid_argument("auction: reserve outside [0, v_max]");
  for (double b : bids) {
    if (!(b >= 0.0 && b <= v_max))
      throw std::invalid_argument("auction: bid outside [0, v_max]");
  }

  int top = 0;
  for (int i = 1; i < static_cast<int>(bids.size()); ++i)
    if (bids[i] > bids[top]) top = i;
  double second = -1.0;
  for (int i = 0; i < static_cast<int>(bids.size()); ++i)
    if (i != top && bids[i] > second) second = bids[i];

  AuctionOutcome out;
  out.payments.assign(bids.size(), 0.0);
  if (bids[top] >= reserve) {
    out.allocated = true;
    out.winner = top;
    out.clearing_price = std::max(reserve, second);
    out.payments[top] = out.clearing_price;
  }
  return out;
}

AuctionOutcome run_isolation(double bid, double reserve) {
  AuctionOutcome out;
  out.payments.assign(1, 0.0);
  if (bid >= reserve) {
    out.allocated = true;
    out.winner = 0;
    out.clearing_price = reserve;
    out.payments[0] = reserve;
  }
  return out;
}

double realized_revenue(const AuctionOutcome& outcome) {
  double total = 0.0;
  for (double p : outcome.payments) total += p;
  return total;
}

}  // namespace reservelab
