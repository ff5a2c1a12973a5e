# Domain objects
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.models.distance_matrix import DistanceMatrix
