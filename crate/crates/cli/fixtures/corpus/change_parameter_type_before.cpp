class Geometry {
public:
  double area(int r){
    return 3.14 * r * r;
  }
};
