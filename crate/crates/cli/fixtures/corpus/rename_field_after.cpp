class Shape {
public:
  int breadth;
  int w(){
    return breadth;
  }
};
