"""
pyloewner: Loewner coefficient dynamics, Pontryagin adjoints and
optimality conditions for pairs of linear functionals on univalent
functions.

"""

__version__ = '0.1-git'
