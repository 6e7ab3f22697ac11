"""Coded compressed sensing for unsourced random access with list-recoverable outer codes.

Modules
-------
gf        binary extension fields and (bi)variate polynomials
achannel  A-channel with symbol misses and insertions, capacity estimate
bounds    random coding and tree-code bounds, bit allocation, E_b/N_0 search
ttree     tree outer code and its list decoder
rs        Reed-Solomon list recovery and the prefix/coset scheme
crc       systematic CRC
phy       inner codebook, slot channel, OMP decoding, ROC estimation
sim       end-to-end Monte Carlo
cli       command-line front end
"""

__version__ = "0.1.0"
