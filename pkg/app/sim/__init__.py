# Monte-Carlo simulation
