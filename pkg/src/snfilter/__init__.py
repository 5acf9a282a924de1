"""Complete filter sets for the optimal-depth sorting network problem."""
