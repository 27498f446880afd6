"""First-passage times and quasi-invariant laws for mixed-exponential Levy processes."""
