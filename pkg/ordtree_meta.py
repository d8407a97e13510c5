"""Define meta information about ordtree package."""

__title__ = 'ordtree'
__description__ = ('ordtree grows decision trees with ordinal splitting '
                   'criteria and benchmarks them on ordinal datasets.')
__url__ = 'https://github.com/Parquery/ordtree'
__version__ = '1.0.0'
__author__ = 'Selim Naji, Adam Radomski and Marko Ristin'
__author_email__ = 'selim.naji@parquery.com, adam.radomski@parquery.com, marko.ristin@gmail.com'
__license__ = 'MIT'
__copyright__ = 'Copyright 2018 Parquery AG'
