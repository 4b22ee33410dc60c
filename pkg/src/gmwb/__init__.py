"""Dynamic-programming valuation of GMWB variable annuities under Hull-White rates."""

__version__ = "0.1.0"
