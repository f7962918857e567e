class Geometry {
public:
  double area(double radius){
    return 3.14 * radius * radius;
  }
};
