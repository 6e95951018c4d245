"""Functions of bounded variation on a compact interval.

Subpackages and modules:

* ``funcrep`` - representations, the example catalog, algebra, spec files
* ``variation`` - exact and refined total variation, Jordan decomposition
* ``decompose`` - jumps, saltus function, three-part decomposition, AC test, Dini
* ``indicatrix`` - Banach indicatrix, level functions, corrected multiplicity
* ``mollify`` - integral means and their variation
* ``measure`` - derivative measures, Stieltjes integration, NBV normalization
* ``essential`` - essential variation on grids, admissible representatives
* ``sequences`` - BV norm and metric, Helly selection, semicontinuity
"""

__version__ = "0.1.0"

SCHEMA = "bv-toolkit/1"
