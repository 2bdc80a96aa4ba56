# Variational solver: constrained minimization, multipliers and Sobolev estimates
