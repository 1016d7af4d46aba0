// Prints the session-core transition table as markdown.

#include <iostream>

#include "ridelink/session/transition_table.hpp"

int main() {
  std::cout << ridelink::session::render_transition_table(ridelink::session::transition_table());
  return 0;
}
